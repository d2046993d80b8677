"""Procedural rule-compliant floor plans with analytically known ground truth.

Rooms come from a binary space partition of the canvas, so every room is an
axis-aligned rectangle bounded by 3 px walls. Doors are placed on shared
walls: first a uniform random spanning tree of the wall-adjacency graph (so
the plan is connected), then extra doors with a fixed probability. The truth
IR is computed from the rectangles, never from pixels, which makes
``extract(plan.raster) == plan.truth`` a real check of the extractor.

Geometry uses wall-centreline coordinates. A wall on centreline ``c`` covers
pixels ``c - w//2 .. c + w//2`` across its length.
"""

from __future__ import annotations

import dataclasses
import enum
import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .graph import Door, FloorPlanIR, Orientation, Room, canonical, edges_from_doors
from .raster import ColorClass, PixelGrid


class GenerationError(RuntimeError):
    """The configuration could not be satisfied within the retry budget."""


class PerturbationError(ValueError):
    """The requested perturbation does not apply to this plan."""


@dataclass(frozen=True)
class SynthConfig:
    min_rooms: int = 3
    max_rooms: int = 6
    width: int = 1000
    height: int = 1000
    wall_width: int = 3
    door_length: int = 24
    dot_size: int = 10
    extra_door_prob: float = 0.25
    area_margin: float = 0.02
    seed: int = 0
    outer_margin: int = 20
    min_room_side: int = 100
    max_attempts: int = 200

    def __post_init__(self):
        if self.min_rooms < 1 or self.max_rooms < self.min_rooms:
            raise ValueError(f"bad room range [{self.min_rooms}, {self.max_rooms}]")
        if self.wall_width < 1 or self.wall_width % 2 == 0:
            raise ValueError("wall width must be a positive odd number")
        if self.door_length <= self.wall_width:
            raise ValueError("door length must exceed wall width")
        if self.area_margin <= 0:
            raise ValueError("area margin must be positive")
        if not 0.0 <= self.extra_door_prob <= 1.0:
            raise ValueError("extra door probability must be in [0, 1]")
        if self.dot_size < 1:
            raise ValueError("dot size must be positive")
        if self.min_room_side < max(self.door_length + 2 * self.door_clearance,
                                    self.dot_size + 2 * self.wall_width + 2):
            raise ValueError("min room side too small for a door and a dot")
        if min(self.width, self.height) - 2 * self.outer_margin < self.min_room_side:
            raise ValueError("canvas too small for one room")

    @property
    def half_wall(self) -> int:
        return self.wall_width // 2

    @property
    def door_clearance(self) -> int:
        """Gap kept between a door and the wall junctions at either end."""
        return 2 * self.wall_width + 2


@dataclass(frozen=True)
class Rect:
    x0: int
    y0: int
    x1: int
    y1: int

    def interior_area(self, wall_width: int) -> int:
        return (self.x1 - self.x0 - wall_width) * (self.y1 - self.y0 - wall_width)

    @property
    def center(self) -> tuple[int, int]:
        return (self.x0 + self.x1) // 2, (self.y0 + self.y1) // 2


@dataclass(frozen=True)
class SharedWall:
    """Wall stretch between two rooms: centreline ``line``, span ``lo..hi``."""

    a: int
    b: int
    orientation: Orientation
    line: int
    lo: int
    hi: int


@dataclass(frozen=True)
class SynthDoor:
    wall: SharedWall
    start: int

    def span(self, length: int) -> tuple[int, int]:
        return self.start, self.start + length - 1


@dataclass(frozen=True)
class Patch:
    """Raster-only edit: fill the half-open box with one class."""

    x: int
    y: int
    w: int
    h: int
    color: ColorClass


class Perturbation(enum.Enum):
    REMOVE_DOOR = "remove-door"
    ADD_DOOR = "add-door"
    SWAP_RANKS = "swap-ranks"
    PUNCH_GAP = "punch-gap"
    DELETE_DOT = "delete-dot"
    OFF_PALETTE_SPECK = "off-palette-speck"


@dataclass(frozen=True)
class SynthPlan:
    config: SynthConfig
    rooms: tuple[Rect, ...]
    walls: tuple[tuple[int, int, int, int], ...]
    shared_walls: tuple[SharedWall, ...]
    doors: tuple[SynthDoor, ...]
    truth: FloorPlanIR
    dots: tuple[bool, ...] = ()
    patches: tuple[Patch, ...] = ()
    expected_rules: frozenset[int] = frozenset()
    rule_breaking: bool = False
    truth_matches_raster: bool = True
    perturbations: tuple[str, ...] = field(default=())

    @cached_property
    def raster(self) -> PixelGrid:
        return PixelGrid(paint(self))

    @property
    def rank_of_room(self) -> dict[int, int]:
        return _ranks(self.rooms, self.config.wall_width)


def paint(plan: SynthPlan) -> np.ndarray:
    """Paint the plan with direct array slicing (independent of the SVG rasterizer)."""
    cfg = plan.config
    half = cfg.half_wall
    out = np.full((cfg.height, cfg.width), ColorClass.WHITE, dtype=np.uint8)
    for x1, y1, x2, y2 in plan.walls:
        if y1 == y2:
            out[y1 - half:y1 + half + 1, min(x1, x2):max(x1, x2) + 1] = ColorClass.BLACK
        else:
            out[min(y1, y2):max(y1, y2) + 1, x1 - half:x1 + half + 1] = ColorClass.BLACK
    for d in plan.doors:
        s, e = d.span(cfg.door_length)
        c = d.wall.line
        if d.wall.orientation is Orientation.HORIZONTAL:
            out[c - half:c + half + 1, s:e + 1] = ColorClass.GREEN
        else:
            out[s:e + 1, c - half:c + half + 1] = ColorClass.GREEN
    for room, present in zip(plan.rooms, plan.dots):
        if present:
            x, y = _dot_origin(room, cfg.dot_size)
            out[y:y + cfg.dot_size, x:x + cfg.dot_size] = ColorClass.RED
    for p in plan.patches:
        out[p.y:p.y + p.h, p.x:p.x + p.w] = p.color
    return out


def _dot_origin(room: Rect, size: int) -> tuple[int, int]:
    cx, cy = room.center
    return cx - size // 2, cy - size // 2


def _ranks(rooms, wall_width) -> dict[int, int]:
    order = sorted(range(len(rooms)), key=lambda i: (-rooms[i].interior_area(wall_width),
                                                     rooms[i].y0 + rooms[i].y1, rooms[i].x0 + rooms[i].x1))
    return {room: rank for rank, room in enumerate(order, start=1)}


def _door_center(door: SynthDoor, length: int) -> tuple[float, float]:
    mid = door.start + (length - 1) / 2
    c = float(door.wall.line)
    return (mid, c) if door.wall.orientation is Orientation.HORIZONTAL else (c, mid)


def analytic_truth(rooms, doors, config: SynthConfig) -> FloorPlanIR:
    rank = _ranks(rooms, config.wall_width)
    ir_rooms = tuple(
        Room(rank[i], r.interior_area(config.wall_width), ((r.x0 + r.x1) / 2, (r.y0 + r.y1) / 2))
        for i, r in enumerate(rooms)
    )
    ir_doors = tuple(
        Door(_door_center(d, config.door_length), d.wall.orientation,
             tuple(sorted((rank[d.wall.a], rank[d.wall.b]))))
        for d in doors
    )
    return canonical(FloorPlanIR(ir_rooms, ir_doors, edges_from_doors(ir_doors)))


def _partition(cfg: SynthConfig, k: int, rng: np.random.Generator):
    m = cfg.outer_margin
    outer = Rect(m, m, cfg.width - 1 - m, cfg.height - 1 - m)
    leaves = [outer]
    splits = []
    side = cfg.min_room_side
    while len(leaves) < k:
        options = [i for i, r in enumerate(leaves)
                   if r.x1 - r.x0 >= 2 * side or r.y1 - r.y0 >= 2 * side]
        if not options:
            return None
        areas = np.array([(leaves[i].x1 - leaves[i].x0) * (leaves[i].y1 - leaves[i].y0) for i in options],
                         dtype=np.float64)
        r = leaves.pop(options[int(rng.choice(len(options), p=areas / areas.sum()))])
        w, h = r.x1 - r.x0, r.y1 - r.y0
        can_v, can_h = w >= 2 * side, h >= 2 * side
        vertical = can_v and (not can_h or rng.random() < w / (w + h))
        if vertical:
            s = int(rng.integers(r.x0 + side, r.x1 - side + 1))
            leaves += [Rect(r.x0, r.y0, s, r.y1), Rect(s, r.y0, r.x1, r.y1)]
            splits.append((s, r.y0, s, r.y1))
        else:
            s = int(rng.integers(r.y0 + side, r.y1 - side + 1))
            leaves += [Rect(r.x0, r.y0, r.x1, s), Rect(r.x0, s, r.x1, r.y1)]
            splits.append((r.x0, s, r.x1, s))
    half = cfg.half_wall
    walls = [
        (outer.x0 - half, outer.y0, outer.x1 + half, outer.y0),
        (outer.x1, outer.y0 - half, outer.x1, outer.y1 + half),
        (outer.x1 + half, outer.y1, outer.x0 - half, outer.y1),
        (outer.x0, outer.y1 + half, outer.x0, outer.y0 - half),
    ]
    leaves.sort(key=lambda r: (r.y0, r.x0))
    return tuple(leaves), tuple(walls + splits)


def _shared_walls(rooms, cfg: SynthConfig) -> tuple[SharedWall, ...]:
    need = cfg.door_length - 1 + 2 * cfg.door_clearance
    out = []
    for i, j in itertools.combinations(range(len(rooms)), 2):
        a, b = rooms[i], rooms[j]
        if a.x1 == b.x0 or b.x1 == a.x0:
            line, orient = (a.x1 if a.x1 == b.x0 else b.x1), Orientation.VERTICAL
            lo, hi = max(a.y0, b.y0), min(a.y1, b.y1)
        elif a.y1 == b.y0 or b.y1 == a.y0:
            line, orient = (a.y1 if a.y1 == b.y0 else b.y1), Orientation.HORIZONTAL
            lo, hi = max(a.x0, b.x0), min(a.x1, b.x1)
        else:
            continue
        if hi - lo >= need:
            out.append(SharedWall(i, j, orient, line, lo, hi))
    return tuple(out)


def _areas_separated(rooms, cfg: SynthConfig) -> bool:
    areas = sorted((r.interior_area(cfg.wall_width) for r in rooms), reverse=True)
    return all(big - small >= cfg.area_margin * big for big, small in zip(areas, areas[1:]))


def _uniform_spanning_tree(n: int, walls: tuple[SharedWall, ...], rng) -> list[SharedWall] | None:
    """Aldous-Broder random walk; returns None if the wall graph is disconnected."""
    nbrs: dict[int, list[tuple[int, SharedWall]]] = {i: [] for i in range(n)}
    for w in walls:
        nbrs[w.a].append((w.b, w))
        nbrs[w.b].append((w.a, w))
    seen = {0}
    stack = [0]
    while stack:
        for v, _ in nbrs[stack.pop()]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    if len(seen) < n:
        return None
    cur = int(rng.integers(n))
    visited = {cur}
    tree = []
    while len(visited) < n:
        nxt, wall = nbrs[cur][int(rng.integers(len(nbrs[cur])))]
        if nxt not in visited:
            visited.add(nxt)
            tree.append(wall)
        cur = nxt
    return tree


def _place_door(wall: SharedWall, cfg: SynthConfig, rng) -> SynthDoor:
    lo = wall.lo + cfg.door_clearance
    hi = wall.hi - cfg.door_clearance - cfg.door_length + 1
    return SynthDoor(wall, int(rng.integers(lo, hi + 1)))


def generate(config: SynthConfig | None = None, seed: int | None = None) -> SynthPlan:
    cfg = config or SynthConfig()
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=seed)
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.max_attempts):
        k = int(rng.integers(cfg.min_rooms, cfg.max_rooms + 1))
        parted = _partition(cfg, k, rng)
        if parted is None:
            continue
        rooms, walls = parted
        if not _areas_separated(rooms, cfg):
            continue
        shared = _shared_walls(rooms, cfg)
        tree = _uniform_spanning_tree(len(rooms), shared, rng)
        if tree is None:
            continue
        doored = set(tree)
        doors = [_place_door(w, cfg, rng) for w in tree]
        for w in shared:
            if w not in doored and rng.random() < cfg.extra_door_prob:
                doors.append(_place_door(w, cfg, rng))
        doors.sort(key=lambda d: (d.wall.a, d.wall.b))
        return SynthPlan(
            config=cfg,
            rooms=rooms,
            walls=walls,
            shared_walls=shared,
            doors=tuple(doors),
            truth=analytic_truth(rooms, doors, cfg),
            dots=(True,) * len(rooms),
        )
    raise GenerationError(
        f"no plan with {cfg.min_rooms}-{cfg.max_rooms} rooms on {cfg.width}x{cfg.height} "
        f"after {cfg.max_attempts} attempts"
    )


def random_baseline(config: SynthConfig | None = None, seed: int = 0) -> FloorPlanIR:
    """Truth IR of a plan drawn with no knowledge of any target apartment."""
    return generate(config, seed=seed).truth


def baseline_pair_seeds(pairs: int, block: int = 0) -> list[tuple[int, int]]:
    """Seed recipe for random-baseline Monte Carlo: block b, pair i uses seeds 2j and 2j+1, j = b*pairs + i."""
    return [(2 * (block * pairs + i), 2 * (block * pairs + i) + 1) for i in range(pairs)]


def baseline_mean(pairs: int = 100, block: int = 0, config: SynthConfig | None = None) -> float:
    """Mean composite score between independent random-baseline plans."""
    from .scorer import composite_score

    scores = [composite_score(random_baseline(config, a), random_baseline(config, b)).composite
              for a, b in baseline_pair_seeds(pairs, block)]
    return float(np.mean(scores))


def _is_bridge(doors: tuple[SynthDoor, ...], idx: int, n: int) -> bool:
    rest = [d for i, d in enumerate(doors) if i != idx]
    nbrs: dict[int, set[int]] = {i: set() for i in range(n)}
    for d in rest:
        nbrs[d.wall.a].add(d.wall.b)
        nbrs[d.wall.b].add(d.wall.a)
    seen, stack = {0}, [0]
    while stack:
        for v in nbrs[stack.pop()] - seen:
            seen.add(v)
            stack.append(v)
    return len(seen) < n


def _free_gap_positions(plan: SynthPlan, wall: SharedWall) -> list[int]:
    cfg = plan.config
    taken = set()
    for d in plan.doors:
        if d.wall == wall:
            s, e = d.span(cfg.door_length)
            taken.update(range(s - 2, e + 3))
    return [g for g in range(wall.lo + cfg.door_clearance, wall.hi - cfg.door_clearance + 1) if g not in taken]


def perturb(plan: SynthPlan, op: Perturbation | str, seed: int = 0, *,
            keep_connected: bool = False, ranks: tuple[int, int] | None = None) -> SynthPlan:
    """Apply one seeded perturbation and return the new plan.

    REMOVE_DOOR, ADD_DOOR and SWAP_RANKS change the truth IR. PUNCH_GAP,
    DELETE_DOT and OFF_PALETTE_SPECK only touch the raster; the plan is
    marked rule-breaking and ``expected_rules`` names the rule the validator
    should report.
    """
    op = Perturbation(op)
    rng = np.random.default_rng(seed)
    cfg = plan.config
    n = len(plan.rooms)
    history = plan.perturbations + (op.value,)

    if op is Perturbation.REMOVE_DOOR:
        choices = [i for i in range(len(plan.doors))
                   if not (keep_connected and _is_bridge(plan.doors, i, n))]
        if not choices:
            raise PerturbationError("no removable door")
        idx = choices[int(rng.integers(len(choices)))]
        doors = plan.doors[:idx] + plan.doors[idx + 1:]
        return dataclasses.replace(plan, doors=doors, truth=analytic_truth(plan.rooms, doors, cfg),
                                   perturbations=history)

    if op is Perturbation.ADD_DOOR:
        doored = {d.wall for d in plan.doors}
        free = [w for w in plan.shared_walls if w not in doored]
        if not free:
            raise PerturbationError("every shared wall already has a door")
        door = _place_door(free[int(rng.integers(len(free)))], cfg, rng)
        doors = tuple(sorted(plan.doors + (door,), key=lambda d: (d.wall.a, d.wall.b)))
        return dataclasses.replace(plan, doors=doors, truth=analytic_truth(plan.rooms, doors, cfg),
                                   perturbations=history)

    if op is Perturbation.SWAP_RANKS:
        if n < 2:
            raise PerturbationError("need two rooms to swap ranks")
        if ranks is None:
            i, j = (int(v) + 1 for v in rng.choice(n, size=2, replace=False))
        else:
            i, j = ranks
        if not (1 <= i <= n and 1 <= j <= n) or i == j:
            raise PerturbationError(f"bad rank pair ({i}, {j}) for {n} rooms")
        swap = {i: j, j: i}
        doors = tuple(Door(d.center, d.orientation, tuple(sorted(swap.get(r, r) for r in d.rooms)))
                      for d in plan.truth.doors)
        truth = canonical(FloorPlanIR(plan.truth.rooms, doors, edges_from_doors(doors)))
        return dataclasses.replace(plan, truth=truth, truth_matches_raster=False, perturbations=history)

    if op is Perturbation.PUNCH_GAP:
        options = [(w, g) for w in plan.shared_walls for g in _free_gap_positions(plan, w)]
        if not options:
            raise PerturbationError("no interior wall to punch")
        wall, g = options[int(rng.integers(len(options)))]
        c = wall.line - cfg.half_wall
        if wall.orientation is Orientation.HORIZONTAL:
            patch = Patch(g, c, 1, cfg.wall_width, ColorClass.WHITE)
        else:
            patch = Patch(c, g, cfg.wall_width, 1, ColorClass.WHITE)
        return _break(plan, history, 7, patches=plan.patches + (patch,))

    if op is Perturbation.DELETE_DOT:
        have = [i for i, present in enumerate(plan.dots) if present]
        if not have:
            raise PerturbationError("no dot left to delete")
        idx = have[int(rng.integers(len(have)))]
        dots = tuple(False if i == idx else d for i, d in enumerate(plan.dots))
        return _break(plan, history, 6, dots=dots)

    room = plan.rooms[int(rng.integers(n))]
    inset = cfg.half_wall + 2
    patch = Patch(room.x0 + inset, room.y0 + inset, 1, 1, ColorClass.OTHER)
    return _break(plan, history, 8, patches=plan.patches + (patch,))


def _break(plan: SynthPlan, history, rule: int, **changes) -> SynthPlan:
    return dataclasses.replace(plan, rule_breaking=True, expected_rules=plan.expected_rules | {rule},
                               perturbations=history, **changes)


_SVG_COLORS = {
    ColorClass.WHITE: "#ffffff",
    ColorClass.BLACK: "#000000",
    ColorClass.GREEN: "#00ff00",
    ColorClass.RED: "#ff0000",
    ColorClass.OTHER: "#808080",
}


def render_to_svg(plan: SynthPlan) -> str:
    """Vector form of the plan using only whitelisted elements.

    Parsing and rasterizing the result reproduces ``plan.raster`` exactly.
    """
    cfg = plan.config
    ww = cfg.wall_width
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{cfg.width}" height="{cfg.height}" '
        f'viewBox="0 0 {cfg.width} {cfg.height}">'
    ]
    for x1, y1, x2, y2 in plan.walls:
        lines.append(f'  <line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="#000000" stroke-width="{ww}"/>')
    for d in plan.doors:
        s, e = d.span(cfg.door_length)
        c = d.wall.line
        x1, y1, x2, y2 = (s, c, e, c) if d.wall.orientation is Orientation.HORIZONTAL else (c, s, c, e)
        lines.append(f'  <line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="#00ff00" stroke-width="{ww}"/>')
    for room, present in zip(plan.rooms, plan.dots):
        if present:
            x, y = _dot_origin(room, cfg.dot_size)
            r = cfg.dot_size / 2
            lines.append(f'  <circle cx="{x + r:g}" cy="{y + r:g}" r="{r:g}" fill="#ff0000"/>')
    for p in plan.patches:
        lines.append(f'  <rect x="{p.x}" y="{p.y}" width="{p.w}" height="{p.h}" fill="{_SVG_COLORS[p.color]}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
