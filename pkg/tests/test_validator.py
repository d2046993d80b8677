import pytest

from conftest import synth_plan
from grids import K, O, R, box, canvas, dot, frame, grid, two_rooms
from planscore.raster import PixelGrid
from planscore.synth import perturb
from planscore.validator import RULES, RuleViolation, validate


def rules(g):
    return {v.rule for v in validate(g)}


def test_all_white_has_no_dots():
    assert rules(PixelGrid.blank(80, 80)) == {6}


@pytest.mark.parametrize("seed", range(20))
def test_clean_generated_plan_has_no_violations(seed):
    assert validate(synth_plan(seed).raster) == []


def test_hand_built_plan_is_clean():
    assert validate(grid(two_rooms())) == []


@pytest.mark.parametrize("op, rule", [("delete-dot", 6), ("punch-gap", 7), ("off-palette-speck", 8)])
def test_rule_breaking_perturbations_are_caught(op, rule):
    for seed in range(5):
        plan = perturb(synth_plan(seed, min_rooms=3, max_rooms=5), op, seed=seed)
        assert plan.expected_rules == {rule}
        assert rule in rules(plan.raster)


def test_transparency_is_rule_4():
    g = PixelGrid(two_rooms(), transparent=True)
    assert rules(g) == {4}


def test_oversized_dot():
    a = canvas(100, 100)
    frame(a, 0, 0, 99, 99)
    box(a, 30, 30, 49, 49, R)  # 400 px
    assert 6 in rules(grid(a))


def test_stray_red_speck_is_reported_once():
    a = two_rooms(door=False)
    a[10, 10] = R
    a[10, 100] = R
    found = [v for v in validate(grid(a)) if v.rule == 6]
    assert len(found) == 1


def test_dotless_enclosed_room():
    a = two_rooms(door=False)
    box(a, 85, 25, 94, 34, 0)  # erase the second dot
    assert rules(grid(a)) == {6}


def test_door_without_wall():
    a = two_rooms(door=False)
    box(a, 20, 45, 31, 47, 2)  # green floating in the room
    assert 1 in rules(grid(a))


def test_room_open_to_border():
    a = canvas(60, 60)
    box(a, 0, 0, 59, 2, K)
    dot(a, 30, 30)
    assert 5 in rules(grid(a))


def test_off_palette_pixels_aggregate():
    a = two_rooms()
    a[5:8, 5:8] = O
    found = [v for v in validate(grid(a)) if v.rule == 8]
    assert len(found) == 1 and "9" in found[0].description


def test_violation_record():
    v = RuleViolation(7, "leak", (3, 4))
    assert RuleViolation.from_dict(v.to_dict()) == v
    assert set(RULES) == set(range(1, 10))
    with pytest.raises(ValueError):
        RuleViolation(10, "nope")
