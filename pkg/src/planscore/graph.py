"""Interchange record for an extracted plan, size ranking, and the room graph.

Serialized form (``ir_version`` 1)::

    {
      "ir_version": 1,
      "rooms": [{"rank": 1, "area": 5120, "centroid": [x, y]}, ...],
      "doors": [{"center": [x, y], "orientation": "horizontal", "rooms": [1, 2]}, ...],
      "edges": [[1, 2], ...],
      "violations": [{"rule": 7, "description": "...", "location": [x, y] | null}, ...]
    }

Ranks are 1..n with rank 1 the largest room. Edges are unordered pairs
written smaller-rank first, sorted, without duplicates or self-loops.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

from .validator import RuleViolation

IR_VERSION = 1


class Orientation(str, enum.Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


class IRError(ValueError):
    code = "ir-error"


class IRFormatError(IRError):
    """Document is not valid JSON or does not have the IR shape."""

    code = "malformed"


class IRInvariantError(IRError):
    """Document parses but breaks an IR invariant (rank gap, dangling edge, ...)."""

    code = "invariant"


@dataclass(frozen=True)
class Room:
    rank: int
    area: int
    centroid: tuple[float, float]


@dataclass(frozen=True)
class Door:
    center: tuple[float, float]
    orientation: Orientation
    rooms: tuple[int, ...] = ()


@dataclass(frozen=True)
class FloorPlanIR:
    rooms: tuple[Room, ...] = ()
    doors: tuple[Door, ...] = ()
    edges: tuple[tuple[int, int], ...] = ()
    violations: tuple[RuleViolation, ...] = field(default=())

    @property
    def room_count(self) -> int:
        return len(self.rooms)

    @property
    def door_count(self) -> int:
        return len(self.doors)

    def check(self) -> "FloorPlanIR":
        """Raise IRInvariantError if the record is not canonical-consistent."""
        n = len(self.rooms)
        ranks = [r.rank for r in self.rooms]
        if sorted(ranks) != list(range(1, n + 1)):
            raise IRInvariantError(f"room ranks must be exactly 1..{n}, got {sorted(ranks)}")
        by_rank = sorted(self.rooms, key=lambda r: r.rank)
        for a, b in zip(by_rank, by_rank[1:]):
            if a.area < b.area:
                raise IRInvariantError(f"rank {a.rank} (area {a.area}) is smaller than rank {b.rank} (area {b.area})")
        if any(r.area < 1 for r in self.rooms):
            raise IRInvariantError("room areas must be >= 1")
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise IRInvariantError(f"self-loop on room {u}")
            if not (1 <= u <= n and 1 <= v <= n):
                raise IRInvariantError(f"edge ({u}, {v}) references a room outside 1..{n}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise IRInvariantError(f"duplicate edge {key}")
            seen.add(key)
        for d in self.doors:
            if len(set(d.rooms)) != len(d.rooms):
                raise IRInvariantError(f"door at {d.center} lists a room twice")
            if any(not 1 <= r <= n for r in d.rooms):
                raise IRInvariantError(f"door at {d.center} references a room outside 1..{n}")
        return self


def edges_from_doors(doors: Iterable[Door]) -> tuple[tuple[int, int], ...]:
    """Every pair of rooms sharing a door, deduplicated and sorted."""
    pairs = set()
    for d in doors:
        for u, v in itertools.combinations(sorted(d.rooms), 2):
            pairs.add((u, v))
    return tuple(sorted(pairs))


class _Region(Protocol):
    region_id: int
    area: int
    centroid: tuple[float, float]


def rank_rooms(regions: Sequence[_Region]) -> dict[int, int]:
    """Map region id to size rank; ties broken topmost-then-leftmost centroid."""
    order = sorted(regions, key=lambda r: (-r.area, r.centroid[1], r.centroid[0], r.region_id))
    return {r.region_id: i for i, r in enumerate(order, start=1)}


@dataclass(frozen=True)
class RoomGraph:
    n: int
    edges: frozenset[tuple[int, int]]

    @property
    def degrees(self) -> tuple[int, ...]:
        """Degree of rank 1, 2, ..., n."""
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u - 1] += 1
            deg[v - 1] += 1
        return tuple(deg)


def to_graph(ir: FloorPlanIR) -> RoomGraph:
    return RoomGraph(len(ir.rooms), frozenset((min(u, v), max(u, v)) for u, v in ir.edges))


def canonical(ir: FloorPlanIR) -> FloorPlanIR:
    """Sort rooms by rank, doors row-major by centre, and normalise edges."""
    rooms = tuple(sorted(ir.rooms, key=lambda r: r.rank))
    doors = tuple(
        sorted(
            (Door(d.center, d.orientation, tuple(sorted(d.rooms))) for d in ir.doors),
            key=lambda d: (d.center[1], d.center[0], d.orientation.value, d.rooms),
        )
    )
    edges = tuple(sorted({(min(u, v), max(u, v)) for u, v in ir.edges}))
    return FloorPlanIR(rooms, doors, edges, tuple(ir.violations))


def to_dict(ir: FloorPlanIR) -> dict:
    ir = canonical(ir)
    return {
        "ir_version": IR_VERSION,
        "rooms": [{"rank": r.rank, "area": r.area, "centroid": list(r.centroid)} for r in ir.rooms],
        "doors": [
            {"center": list(d.center), "orientation": d.orientation.value, "rooms": list(d.rooms)}
            for d in ir.doors
        ],
        "edges": [list(e) for e in ir.edges],
        "violations": [v.to_dict() for v in ir.violations],
    }


def serialize(ir: FloorPlanIR, indent: int | None = 2) -> str:
    return json.dumps(to_dict(ir), indent=indent, sort_keys=True)


def _pair(value, what) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise IRFormatError(f"{what} must be a 2-element list")
    try:
        return float(value[0]), float(value[1])
    except (TypeError, ValueError) as exc:
        raise IRFormatError(f"{what} must hold numbers") from exc


def from_dict(doc) -> FloorPlanIR:
    if not isinstance(doc, dict):
        raise IRFormatError("IR document must be a JSON object")
    if doc.get("ir_version") != IR_VERSION:
        raise IRFormatError(f"unsupported ir_version {doc.get('ir_version')!r}")
    missing = [k for k in ("rooms", "doors", "edges") if not isinstance(doc.get(k), list)]
    if missing:
        raise IRFormatError(f"IR needs list fields: {', '.join(missing)}")
    try:
        rooms = tuple(
            Room(int(r["rank"]), int(r["area"]), _pair(r["centroid"], "room centroid"))
            for r in doc["rooms"]
        )
        doors = tuple(
            Door(_pair(d["center"], "door center"), Orientation(d["orientation"]),
                 tuple(int(x) for x in d.get("rooms", [])))
            for d in doc["doors"]
        )
        edges = []
        for e in doc["edges"]:
            if not isinstance(e, (list, tuple)) or len(e) != 2:
                raise IRFormatError(f"edge {e!r} must be a pair")
            edges.append((int(e[0]), int(e[1])))
        violations = tuple(RuleViolation.from_dict(v) for v in doc.get("violations", []))
    except IRError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise IRFormatError(f"bad IR field: {exc}") from exc
    ir = FloorPlanIR(rooms, doors, tuple(edges), violations)
    ir.check()
    return canonical(ir)


def deserialize(text: str | bytes) -> FloorPlanIR:
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise IRFormatError(f"not JSON: {exc}") from exc
    return from_dict(doc)
