import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import synth_plan
from oracles import brute_segment_cover
from planscore.raster import ColorClass
from planscore.svg import (
    ElementKind,
    SvgSyntaxError,
    VectorElement,
    VectorPlan,
    parse_svg,
    rasterize,
)
from planscore.synth import render_to_svg


def doc(body, attrs='width="100" height="100"'):
    return f'<svg xmlns="http://www.w3.org/2000/svg" {attrs}>{body}</svg>'


def test_single_black_line():
    plan = parse_svg(doc('<line x1="10" y1="20" x2="50" y2="20" stroke="#000" stroke-width="3"/>'))
    assert plan.elements == (VectorElement.segment(10, 20, 50, 20, ColorClass.BLACK, 3),)
    assert plan.issues == ()


def test_empty_document():
    plan = parse_svg(doc(""))
    assert plan.elements == () and plan.issues == ()
    assert (plan.width, plan.height) == (100, 100)


def test_cubic_path_is_reported_and_dropped():
    plan = parse_svg(doc('<path d="M0 0 C 10 10 20 20 30 30" stroke="black"/>'))
    assert plan.elements == ()
    assert [i.code for i in plan.issues] == ["unsupported-command"]


@pytest.mark.parametrize(
    "body, code",
    [
        ('<ellipse cx="5" cy="5" rx="2" ry="3" fill="red"/>', "unsupported-element"),
        ('<text x="1" y="1">hi</text>', "unsupported-element"),
        ('<line x1="0" y1="0" x2="9" y2="0" stroke="black" transform="rotate(4)"/>', "unsupported-transform"),
        ('<line x1="0" y1="0" x2="9" y2="0" stroke="notacolor"/>', "bad-color"),
        ('<rect x="0" y="0" width="-4" height="3" fill="black"/>', "bad-geometry"),
        ('<circle cx="50" cy="50" r="30" fill="red"/>', "oversized-circle"),
    ],
)
def test_issue_codes(body, code):
    plan = parse_svg(doc(body))
    assert plan.elements == ()
    assert [i.code for i in plan.issues] == [code]


def test_malformed_markup_raises():
    with pytest.raises(SvgSyntaxError):
        parse_svg("<svg><line></svg>")
    with pytest.raises(SvgSyntaxError):
        parse_svg("<html/>")


def test_group_paint_is_inherited():
    plan = parse_svg(doc('<g stroke="#00ff00" stroke-width="4"><line x1="0" y1="5" x2="20" y2="5"/></g>'))
    (el,) = plan.elements
    assert el.color is ColorClass.GREEN and el.stroke_width == 4


def test_path_commands_expand_to_segments():
    plan = parse_svg(doc('<path d="M10 10 h20 v20 H10 Z" stroke="black" stroke-width="2"/>'))
    assert [e.geometry for e in plan.elements] == [
        (10, 10, 30, 10), (30, 10, 30, 30), (30, 30, 10, 30), (10, 30, 10, 10),
    ]


def test_viewbox_scales_to_canvas():
    plan = parse_svg(doc('<line x1="0" y1="5" x2="10" y2="5" stroke="black"/>',
                         'width="200" height="200" viewBox="0 0 20 20"'))
    assert plan.elements[0].geometry == (0, 50, 100, 50)


def test_rasterize_horizontal_segment_matches_spec_example():
    plan = VectorPlan(100, 100, (VectorElement.segment(10, 20, 50, 20, ColorClass.BLACK, 3),))
    grid = rasterize(plan)
    ys, xs = np.nonzero(grid.classes == ColorClass.BLACK)
    assert set(ys.tolist()) == {19, 20, 21}
    assert (xs.min(), xs.max()) == (10, 50)
    assert len(xs) == 123


def test_rasterize_dot():
    grid = rasterize(VectorPlan(60, 60, (VectorElement.dot(30, 30, 10, ColorClass.RED),)))
    ys, xs = np.nonzero(grid.classes == ColorClass.RED)
    assert (xs.min(), xs.max(), ys.min(), ys.max()) == (25, 34, 25, 34)


def test_rasterize_empty_plan_is_white():
    grid = rasterize(VectorPlan(40, 30))
    assert (grid.width, grid.height) == (40, 30)
    assert (grid.classes == ColorClass.WHITE).all()


def test_later_elements_paint_over_earlier():
    plan = VectorPlan(20, 20, (
        VectorElement.segment(0, 10, 19, 10, ColorClass.BLACK, 3),
        VectorElement.segment(5, 10, 9, 10, ColorClass.GREEN, 3),
    ))
    g = rasterize(plan)
    assert g.at(7, 10) is ColorClass.GREEN and g.at(2, 10) is ColorClass.BLACK


coord = st.integers(0, 39)


@settings(max_examples=60, deadline=None)
@given(coord, coord, coord, coord, st.sampled_from([1, 2, 3, 4, 5]))
def test_segment_cover_matches_brute_force(x1, y1, x2, y2, width):
    if (x1, y1) == (x2, y2):
        return
    g = rasterize(VectorPlan(40, 40, (VectorElement.segment(x1, y1, x2, y2, ColorClass.BLACK, width),)))
    ys, xs = np.nonzero(g.classes == ColorClass.BLACK)
    assert set(zip(xs.tolist(), ys.tolist())) == brute_segment_cover(x1, y1, x2, y2, width, 40, 40)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_rasterized_output_uses_only_palette(seed):
    plan = synth_plan(seed % 50)
    g = rasterize(parse_svg(render_to_svg(plan)))
    assert not (g.classes == ColorClass.OTHER).any()


@pytest.mark.parametrize("seed", range(10))
def test_synth_svg_rasterizes_to_the_synth_raster(seed):
    plan = synth_plan(seed)
    vp = parse_svg(render_to_svg(plan))
    assert vp.issues == ()
    assert rasterize(vp) == plan.raster


def test_elements_are_kinds():
    plan = parse_svg(doc('<rect x="1" y="1" width="4" height="4" fill="black"/><circle cx="9" cy="9" r="5" fill="red"/>'))
    assert [e.kind for e in plan.elements] == [ElementKind.RECT, ElementKind.DOT]
