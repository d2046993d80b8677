"""Composite similarity between a candidate plan and a ground-truth plan.

Six components, each in [0, 1], are combined with fixed weights (in percent)::

    edge_overlap 50, degree_corr 20, density_sim 10,
    room_count_sim 10, door_count_sim 5, orientation_sim 5

Rooms are compared by size rank, so rank i in the candidate is matched with
rank i in the truth. Identical empty plans score 1 on every component.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .graph import FloorPlanIR, Orientation, RoomGraph, to_graph

WEIGHTS_PERCENT = {
    "edge_overlap": 50,
    "degree_corr": 20,
    "density_sim": 10,
    "room_count_sim": 10,
    "door_count_sim": 5,
    "orientation_sim": 5,
}
WEIGHTS = {k: v / 100 for k, v in WEIGHTS_PERCENT.items()}
COMPONENTS = tuple(WEIGHTS_PERCENT)


def weighted_composite(components: dict[str, float]) -> float:
    # integer percent weights + fsum keep (1,...,1) -> 1.0 and unit vectors -> exact weights
    total = math.fsum(WEIGHTS_PERCENT[k] * components[k] for k in COMPONENTS) / 100
    return min(1.0, max(0.0, total))


@dataclass(frozen=True)
class ScoreBreakdown:
    edge_overlap: float
    degree_corr: float
    density_sim: float
    room_count_sim: float
    door_count_sim: float
    orientation_sim: float
    composite: float

    @classmethod
    def from_components(cls, **components: float) -> "ScoreBreakdown":
        return cls(**{k: float(components[k]) for k in COMPONENTS}, composite=weighted_composite(components))

    @classmethod
    def zero(cls) -> "ScoreBreakdown":
        return cls.from_components(**{k: 0.0 for k in COMPONENTS})

    def to_dict(self) -> dict[str, float]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ScoreBreakdown":
        return cls(**{k: float(d[k]) for k in (*COMPONENTS, "composite")})


def edge_jaccard(a: RoomGraph, b: RoomGraph) -> float:
    union = a.edges | b.edges
    if not union:
        return 1.0
    return len(a.edges & b.edges) / len(union)


def degree_correlation(a: RoomGraph, b: RoomGraph) -> float:
    """Pearson r of rank-aligned degree vectors, mapped to (r + 1) / 2."""
    m = min(a.n, b.n)
    if m == 0:
        return 1.0 if a.n == b.n == 0 else 0.0
    da = np.array(a.degrees[:m], dtype=np.float64)
    db = np.array(b.degrees[:m], dtype=np.float64)
    if np.array_equal(da, db):
        return 1.0
    ca, cb = da - da.mean(), db - db.mean()
    sa, sb = float(np.dot(ca, ca)), float(np.dot(cb, cb))
    if sa == 0.0 or sb == 0.0:
        max_degree = max(da.max(), db.max())
        return float(1.0 - np.abs(da - db).mean() / max_degree)
    r = float(np.dot(ca, cb)) / math.sqrt(sa * sb)
    r = min(1.0, max(-1.0, r))
    return (r + 1.0) / 2.0


def density(g: RoomGraph) -> float:
    if g.n < 2:
        return 0.0
    return len(g.edges) / (g.n * (g.n - 1) / 2)


def density_similarity(a: RoomGraph, b: RoomGraph) -> float:
    return 1.0 - abs(density(a) - density(b))


def count_similarity(x: int, y: int) -> float:
    if x < 0 or y < 0:
        raise ValueError("counts must be non-negative")
    if x == y:
        return 1.0
    return min(x, y) / max(x, y)


def _horizontal_fraction(ir: FloorPlanIR) -> float:
    return sum(d.orientation is Orientation.HORIZONTAL for d in ir.doors) / len(ir.doors)


def orientation_similarity(a: FloorPlanIR, b: FloorPlanIR) -> float:
    if not a.doors or not b.doors:
        return 1.0 if not a.doors and not b.doors else 0.0
    return 1.0 - abs(_horizontal_fraction(a) - _horizontal_fraction(b))


def composite_score(candidate: FloorPlanIR, truth: FloorPlanIR) -> ScoreBreakdown:
    gc, gt = to_graph(candidate), to_graph(truth)
    return ScoreBreakdown.from_components(
        edge_overlap=edge_jaccard(gc, gt),
        degree_corr=degree_correlation(gc, gt),
        density_sim=density_similarity(gc, gt),
        room_count_sim=count_similarity(candidate.room_count, truth.room_count),
        door_count_sim=count_similarity(candidate.door_count, truth.door_count),
        orientation_sim=orientation_similarity(candidate, truth),
    )
