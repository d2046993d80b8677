import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import synth_plan
from grids import G, K, R, W, box, canvas, dot, frame, grid, two_rooms
from oracles import bfs_fill
from planscore.extractor import detect_doors, detect_red_blobs, extract, segment_rooms
from planscore.graph import FloorPlanIR, Orientation
from planscore.raster import PixelGrid


def test_single_blob_centre():
    a = box(canvas(60, 60), 25, 25, 34, 34, R)
    assert detect_red_blobs(grid(a)) == [(30, 30)]


def test_noise_pixels_below_floor_are_ignored():
    a = canvas(100, 60)
    dot(a, 20, 20)
    dot(a, 70, 40)
    for x, y in [(50, 5), (3, 55), (90, 10)]:
        a[y, x] = R
    assert detect_red_blobs(grid(a)) == [(20, 20), (70, 40)]


def test_blobs_are_row_major():
    a = canvas(100, 100)
    dot(a, 80, 20)
    dot(a, 20, 70)
    dot(a, 20, 20)
    assert detect_red_blobs(grid(a)) == [(20, 20), (80, 20), (20, 70)]


def test_horizontal_door_orientation():
    a = canvas(60, 60)
    frame(a, 0, 0, 59, 59)
    box(a, 0, 29, 59, 31, K)
    box(a, 20, 29, 31, 31, G)  # 12 x 3
    dot(a, 30, 14)
    dot(a, 30, 45)
    g = grid(a)
    labels, regions = segment_rooms(g, detect_red_blobs(g))
    (door,) = detect_doors(g, labels)
    assert door.orientation is Orientation.HORIZONTAL
    assert len(door.regions) == 2


def test_vertical_door_joins_two_rooms():
    ir = extract(grid(two_rooms()))
    assert ir.room_count == 2
    assert [d.orientation for d in ir.doors] == [Orientation.VERTICAL]
    assert ir.edges == ((1, 2),)


def test_outer_wall_door_has_single_region():
    a = canvas(60, 60)
    frame(a, 0, 0, 59, 59)
    box(a, 20, 0, 31, 2, G)
    dot(a, 30, 30)
    ir = extract(grid(a))
    assert len(ir.doors) == 1 and ir.doors[0].rooms == (1,)
    assert ir.edges == ()


def test_all_white_gives_empty_ir():
    ir = extract(PixelGrid.blank(50, 40))
    assert (ir.rooms, ir.doors, ir.edges) == ((), (), ())
    assert {v.rule for v in ir.violations} == {6}


def test_closed_door_still_counts():
    # Green blocks traversal, so two dots separated only by a door are still two rooms.
    ir = extract(grid(two_rooms(door=True)))
    assert ir.room_count == 2


def test_no_door_no_edge():
    ir = extract(grid(two_rooms(door=False)))
    assert ir.room_count == 2 and ir.doors == () and ir.edges == ()


def test_two_dots_in_one_region_merge():
    a = canvas(120, 60)
    frame(a, 0, 0, 119, 59)
    dot(a, 30, 30)
    dot(a, 90, 30)
    ir = extract(grid(a))
    assert ir.room_count == 1
    assert 7 in {v.rule for v in ir.violations}


def test_areas_rank_larger_first():
    a = canvas(150, 60)
    frame(a, 0, 0, 149, 59)
    box(a, 49, 0, 51, 59, K)
    dot(a, 25, 30)
    dot(a, 100, 30)
    ir = extract(grid(a))
    assert ir.rooms[0].area > ir.rooms[1].area
    assert ir.rooms[0].centroid[0] > 75


def _random_walls(seed, w=40, h=30):
    rng = np.random.default_rng(seed)
    a = canvas(w, h)
    a[rng.random((h, w)) < 0.3] = K
    a[rng.random((h, w)) < 0.03] = G
    return a


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_segmentation_matches_bfs_oracle(seed):
    a = _random_walls(seed)
    rng = np.random.default_rng(seed + 1)
    passable = [[bool(v not in (K, G)) for v in row] for row in a.tolist()]
    free = np.argwhere(a == W)
    if len(free) == 0:
        return
    pick = free[rng.integers(len(free))]
    start = (int(pick[1]), int(pick[0]))
    labels, regions = segment_rooms(grid(a), [start])
    (r,) = regions
    got = {(int(x), int(y)) for y, x in np.argwhere(labels.labels == r.region_id)}
    assert got == bfs_fill(passable, start)
    assert r.area == len(got)


@pytest.mark.parametrize("seed", range(0, 200, 10))
def test_extraction_recovers_generator_truth(seed):
    plan = synth_plan(seed)
    assert extract(plan.raster) == plan.truth


@pytest.mark.parametrize("seed", range(0, 200, 7))
def test_ir_invariants_on_generated_plans(seed):
    ir = extract(synth_plan(seed).raster)
    ir.check()
    ranks = [r.rank for r in ir.rooms]
    assert ranks == list(range(1, len(ranks) + 1))
    assert all(a.area >= b.area for a, b in zip(ir.rooms, ir.rooms[1:]))
    assert all(u < v for u, v in ir.edges)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_arbitrary_grids_always_yield_valid_ir(seed):
    rng = np.random.default_rng(seed)
    a = rng.choice([W, W, W, K, G, R], size=(rng.integers(1, 50), rng.integers(1, 50))).astype(np.uint8)
    ir = extract(grid(a))
    assert isinstance(ir, FloorPlanIR)
    ir.check()
