import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import synth_plan
from planscore.extractor import RoomRegion
from planscore.graph import (
    Door,
    FloorPlanIR,
    IRFormatError,
    IRInvariantError,
    Orientation,
    Room,
    canonical,
    deserialize,
    edges_from_doors,
    rank_rooms,
    serialize,
    to_graph,
)
from planscore.validator import RuleViolation

H, V = Orientation.HORIZONTAL, Orientation.VERTICAL


def region(i, area, cx=0.0, cy=0.0):
    return RoomRegion(i, ((int(cx), int(cy)),), area, (cx, cy))


def test_rank_by_area():
    ranks = rank_rooms([region(0, 400), region(1, 900), region(2, 100)])
    assert [ranks[i] for i in range(3)] == [2, 1, 3]


def test_rank_tie_prefers_topmost_centroid():
    ranks = rank_rooms([region(0, 50, 10, 9), region(1, 50, 10, 5)])
    assert ranks == {1: 1, 0: 2}


def test_rank_tie_then_leftmost():
    ranks = rank_rooms([region(0, 50, 12, 5), region(1, 50, 3, 5)])
    assert ranks == {1: 1, 0: 2}


def test_edges_deduplicate_parallel_doors():
    doors = [Door((1, 1), H, (1, 2)), Door((5, 5), V, (2, 1)), Door((9, 9), H, (3,))]
    assert edges_from_doors(doors) == ((1, 2),)


def test_three_region_door_yields_all_pairs():
    assert edges_from_doors([Door((0, 0), H, (3, 1, 2))]) == ((1, 2), (1, 3), (2, 3))


def test_degrees():
    ir = FloorPlanIR(tuple(Room(i, 10, (0, 0)) for i in (1, 2, 3)), (), ((1, 2), (1, 3)))
    assert to_graph(ir).degrees == (2, 1, 1)


def test_edge_outside_rooms_is_invariant_error():
    ir = FloorPlanIR(tuple(Room(i, 10, (0, 0)) for i in (1, 2, 3)), (), ((1, 7),))
    with pytest.raises(IRInvariantError):
        ir.check()
    with pytest.raises(IRInvariantError):
        deserialize(serialize(ir))


@pytest.mark.parametrize(
    "rooms, edges",
    [
        ([(1, 10), (3, 5)], ()),           # rank gap
        ([(1, 5), (2, 10)], ()),           # rank order disagrees with area
        ([(1, 10), (2, 5)], ((1, 1),)),    # self-loop
        ([(1, 10), (2, 5)], ((1, 2), (2, 1))),
    ],
)
def test_invariant_violations(rooms, edges):
    ir = FloorPlanIR(tuple(Room(r, a, (0, 0)) for r, a in rooms), (), edges)
    with pytest.raises(IRInvariantError):
        ir.check()


@pytest.mark.parametrize("text", ["{not json", "[]", '{"ir_version": 1}', '{"ir_version": 99, "rooms": [], "doors": [], "edges": []}'])
def test_malformed_documents(text):
    with pytest.raises(IRFormatError):
        deserialize(text)


def test_serialization_is_stable_and_sorted():
    ir = synth_plan(0).truth
    text = serialize(ir)
    assert serialize(deserialize(text)) == text
    doc = json.loads(text)
    assert list(doc) == sorted(doc)


def test_violations_survive_round_trip():
    ir = FloorPlanIR(violations=(RuleViolation(6, "no dots", (1, 2)),))
    assert deserialize(serialize(ir)) == ir


@pytest.mark.parametrize("seed", range(200))
def test_round_trip_over_generated_plans(seed):
    ir = synth_plan(seed).truth
    assert deserialize(serialize(ir)) == ir


@settings(max_examples=100)
@given(st.lists(st.tuples(st.integers(1, 6), st.integers(1, 6)), max_size=12))
def test_canonical_is_idempotent_and_normalises_edges(raw):
    rooms = tuple(Room(i, 100 - i, (i, i)) for i in range(1, 7))
    ir = FloorPlanIR(rooms, (), tuple((u, v) for u, v in raw if u != v))
    once = canonical(ir)
    assert canonical(once) == once
    assert all(u < v for u, v in once.edges)
    assert list(once.edges) == sorted(set(once.edges))
    once.check()
