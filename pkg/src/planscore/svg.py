"""Restricted SVG reader and a no-anti-aliasing rasterizer.

Only the straight-line vocabulary a floor plan needs is accepted::

    line, polyline, rect, circle (as a square room dot, diameter <= 14),
    path with M/m L/l H/h V/v Z/z commands only

plus ``svg`` and ``g`` containers that pass ``stroke``, ``fill`` and
``stroke-width`` (attribute or ``style``) down to their children. Anything
else produces a :class:`ParseIssue` and the offending element is dropped; the
rest of the document is still read.

Issue codes:

``unsupported-element``  element is outside the whitelist
``unsupported-command``  path uses a curve/arc or other non-line command
``unsupported-transform``  element (or group) carries a ``transform``
``bad-color``            a paint value that cannot be parsed
``bad-geometry``         missing or non-numeric coordinates
``oversized-circle``     circle wider than a room dot (curves are not allowed)
"""

from __future__ import annotations

import enum
import math
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

import numpy as np
from PIL import ImageColor

from .raster import DEFAULT_TOLERANCE, ColorClass, PixelGrid, classify_color

DEFAULT_CANVAS = 1000
MAX_DOT_DIAMETER = 14.0
MAX_RASTER_SIDE = 8192
_EPS = 1e-9

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_PATH_TOKEN = re.compile(rf"([A-Za-z])|({_NUMBER})")
_LENGTH = re.compile(rf"^\s*({_NUMBER})\s*(px|%)?\s*$")
_INHERITED = ("stroke", "fill", "stroke-width")


class SvgSyntaxError(ValueError):
    """The document is not well-formed markup."""


class ElementKind(enum.Enum):
    SEGMENT = "segment"
    RECT = "rect"
    DOT = "dot"


@dataclass(frozen=True)
class VectorElement:
    kind: ElementKind
    geometry: tuple[float, ...]
    color: ColorClass | None = None
    stroke_width: float = 1.0
    stroke: ColorClass | None = None

    @classmethod
    def segment(cls, x1, y1, x2, y2, color: ColorClass, width: float) -> "VectorElement":
        return cls(ElementKind.SEGMENT, (float(x1), float(y1), float(x2), float(y2)), color, float(width))

    @classmethod
    def rect(cls, x, y, w, h, fill: ColorClass | None, stroke: ColorClass | None = None,
             width: float = 1.0) -> "VectorElement":
        return cls(ElementKind.RECT, (float(x), float(y), float(w), float(h)), fill, float(width), stroke)

    @classmethod
    def dot(cls, cx, cy, diameter, color: ColorClass) -> "VectorElement":
        return cls(ElementKind.DOT, (float(cx), float(cy), float(diameter)), color)


@dataclass(frozen=True)
class ParseIssue:
    code: str
    element: str
    location: str
    message: str

    def __str__(self):
        return f"{self.location} <{self.element}>: {self.code}: {self.message}"


@dataclass(frozen=True)
class VectorPlan:
    width: float
    height: float
    elements: tuple[VectorElement, ...] = ()
    issues: tuple[ParseIssue, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not (self.width >= 1 and self.height >= 1):
            raise ValueError(f"canvas must be at least 1x1, got {self.width}x{self.height}")


class _Skip(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1] if isinstance(tag, str) else str(tag)


def _parse_style(style: str | None) -> dict[str, str]:
    out = {}
    for decl in (style or "").split(";"):
        if ":" in decl:
            k, v = decl.split(":", 1)
            out[k.strip()] = v.strip()
    return out


def _attrs(elem: ET.Element, inherited: dict[str, str]) -> dict[str, str]:
    attrs = dict(inherited)
    for key in _INHERITED:
        if key in elem.attrib:
            attrs[key] = elem.attrib[key].strip()
    for key, value in _parse_style(elem.attrib.get("style")).items():
        if key in _INHERITED:
            attrs[key] = value
    return attrs


def _length(value: str | None, ref: float, default: float | None = None) -> float:
    if value is None:
        if default is None:
            raise _Skip("bad-geometry", "missing coordinate")
        return default
    m = _LENGTH.match(value)
    if not m:
        raise _Skip("bad-geometry", f"cannot read length {value!r}")
    num = float(m.group(1))
    if not math.isfinite(num):
        raise _Skip("bad-geometry", f"non-finite length {value!r}")
    return num * ref / 100.0 if m.group(2) == "%" else num


def _paint(value: str | None, tolerance: int) -> ColorClass | None:
    if value is None:
        return None
    value = value.strip()
    if value.lower() in ("none", "transparent", ""):
        return None
    try:
        rgb = ImageColor.getrgb(value)
    except (ValueError, AttributeError) as exc:
        raise _Skip("bad-color", f"cannot parse color {value!r}") from exc
    return classify_color(*rgb[:3], tolerance=tolerance)


class _Reader:
    def __init__(self, root: ET.Element, tolerance: int, default_size: int):
        self.tolerance = tolerance
        self.elements: list[VectorElement] = []
        self.issues: list[ParseIssue] = []
        self._setup_viewport(root, default_size)

    def _setup_viewport(self, root, default_size):
        vb = None
        if "viewBox" in root.attrib:
            parts = re.split(r"[\s,]+", root.attrib["viewBox"].strip())
            try:
                nums = [float(p) for p in parts]
                if len(nums) == 4 and nums[2] > 0 and nums[3] > 0 and all(map(math.isfinite, nums)):
                    vb = nums
            except ValueError:
                pass
            if vb is None:
                self._issue("bad-geometry", "svg", "svg", f"ignoring viewBox {root.attrib['viewBox']!r}")

        def dim(name, vb_value):
            raw = root.attrib.get(name)
            if raw is not None:
                m = _LENGTH.match(raw)
                if m and m.group(2) != "%" and float(m.group(1)) >= 1:
                    return float(m.group(1))
            return vb_value if vb_value is not None else float(default_size)

        self.width = dim("width", vb[2] if vb else None)
        self.height = dim("height", vb[3] if vb else None)
        if vb:
            self.sx, self.sy = self.width / vb[2], self.height / vb[3]
            self.ox, self.oy = vb[0], vb[1]
            self.user_w, self.user_h = vb[2], vb[3]
        else:
            self.sx = self.sy = 1.0
            self.ox = self.oy = 0.0
            self.user_w, self.user_h = self.width, self.height
        self.sw = math.sqrt(self.sx * self.sy)

    def _issue(self, code, element, location, message):
        self.issues.append(ParseIssue(code, element, location, message))

    def pt(self, x: float, y: float) -> tuple[float, float]:
        return (x - self.ox) * self.sx, (y - self.oy) * self.sy

    def walk(self, elem: ET.Element, inherited: dict[str, str], location: str):
        counts: dict[str, int] = {}
        for child in elem:
            if not isinstance(child.tag, str):
                continue  # comments, processing instructions
            name = _local(child.tag)
            idx = counts.get(name, 0)
            counts[name] = idx + 1
            loc = f"{location}/{name}[{idx}]"
            try:
                if "transform" in child.attrib:
                    raise _Skip("unsupported-transform", "transforms are not supported")
                attrs = _attrs(child, inherited)
                if name == "g" or name == "svg":
                    self.walk(child, attrs, loc)
                    continue
                handler = getattr(self, "_el_" + name, None)
                if handler is None:
                    raise _Skip("unsupported-element", f"element <{name}> is not supported")
                handler(child, attrs)
            except _Skip as skip:
                self._issue(skip.code, name, loc, skip.message)

    def _stroke(self, attrs) -> tuple[ColorClass | None, float]:
        color = _paint(attrs.get("stroke"), self.tolerance)
        width = _length(attrs.get("stroke-width"), self.user_w, 1.0) * self.sw
        return color, width

    def _add_segments(self, points, attrs):
        color, width = self._stroke(attrs)
        if color is None or width <= 0:
            return
        for (x1, y1), (x2, y2) in zip(points, points[1:]):
            a, b = self.pt(x1, y1), self.pt(x2, y2)
            self.elements.append(VectorElement.segment(*a, *b, color, width))

    def _el_line(self, el, attrs):
        g = el.attrib
        pts = [
            (_length(g.get("x1"), self.user_w, 0.0), _length(g.get("y1"), self.user_h, 0.0)),
            (_length(g.get("x2"), self.user_w, 0.0), _length(g.get("y2"), self.user_h, 0.0)),
        ]
        self._add_segments(pts, attrs)

    def _el_polyline(self, el, attrs):
        raw = el.attrib.get("points", "")
        try:
            nums = [float(v) for v in re.findall(_NUMBER, raw)]
        except ValueError as exc:
            raise _Skip("bad-geometry", "unreadable points") from exc
        if len(nums) % 2 or len(nums) < 4:
            raise _Skip("bad-geometry", f"polyline needs an even count of >= 4 numbers, got {len(nums)}")
        self._add_segments(list(zip(nums[0::2], nums[1::2])), attrs)

    def _el_rect(self, el, attrs):
        g = el.attrib
        x = _length(g.get("x"), self.user_w, 0.0)
        y = _length(g.get("y"), self.user_h, 0.0)
        w = _length(g.get("width"), self.user_w)
        h = _length(g.get("height"), self.user_h)
        fill = _paint(attrs.get("fill", "black"), self.tolerance)
        stroke, width = self._stroke(attrs)
        if w < 0 or h < 0:
            raise _Skip("bad-geometry", f"negative rect size {w}x{h}")
        if w == 0 or h == 0:
            return
        (x0, y0), (x1, y1) = self.pt(x, y), self.pt(x + w, y + h)
        self.elements.append(VectorElement.rect(x0, y0, x1 - x0, y1 - y0, fill, stroke, width))

    def _el_circle(self, el, attrs):
        g = el.attrib
        cx = _length(g.get("cx"), self.user_w, 0.0)
        cy = _length(g.get("cy"), self.user_h, 0.0)
        r = _length(g.get("r"), self.user_w)
        diameter = 2 * r * self.sw
        if diameter > MAX_DOT_DIAMETER:
            raise _Skip("oversized-circle", f"circle diameter {diameter:g} exceeds {MAX_DOT_DIAMETER:g}")
        color = _paint(attrs.get("fill", "black"), self.tolerance)
        if color is None:
            color = _paint(attrs.get("stroke"), self.tolerance)
        if color is None or diameter <= 0:
            return
        self.elements.append(VectorElement.dot(*self.pt(cx, cy), diameter, color))

    def _el_path(self, el, attrs):
        self._add_path(el.attrib.get("d", ""), attrs)

    def _add_path(self, d: str, attrs):
        tokens = []
        pos = 0
        for m in _PATH_TOKEN.finditer(d):
            gap = d[pos:m.start()]
            if gap.strip(" \t\r\n,"):
                raise _Skip("bad-geometry", f"unexpected path data {gap.strip()!r}")
            pos = m.end()
            tokens.append(m.group(1) or float(m.group(2)))
        if d[pos:].strip(" \t\r\n,"):
            raise _Skip("bad-geometry", f"unexpected path data {d[pos:].strip()!r}")

        for tok in tokens:
            if isinstance(tok, str) and tok not in "MmLlHhVvZz":
                raise _Skip("unsupported-command", f"path command {tok!r} is not a straight line")

        polylines: list[list[tuple[float, float]]] = []
        cur = (0.0, 0.0)
        start = (0.0, 0.0)
        cmd = None
        i = 0

        def take(n):
            nonlocal i
            vals = tokens[i:i + n]
            if len(vals) < n or any(isinstance(v, str) for v in vals):
                raise _Skip("bad-geometry", f"path command {cmd!r} is missing arguments")
            i += n
            return vals

        while i < len(tokens):
            tok = tokens[i]
            if isinstance(tok, str):
                cmd = tok
                i += 1
                if cmd in "Zz":
                    if polylines and polylines[-1]:
                        polylines[-1].append(start)
                    cur = start
                    polylines.append([cur])
                    continue
            elif cmd is None or cmd in "Zz":
                raise _Skip("bad-geometry", "path data must start with a command")
            rel = cmd.islower()
            op = cmd.upper()
            if op == "M":
                x, y = take(2)
                cur = (cur[0] + x, cur[1] + y) if rel else (x, y)
                start = cur
                polylines.append([cur])
                cmd = "l" if rel else "L"  # implicit lineto after moveto
                continue
            if not polylines:
                polylines.append([cur])
            if op == "L":
                x, y = take(2)
                cur = (cur[0] + x, cur[1] + y) if rel else (x, y)
            elif op == "H":
                (x,) = take(1)
                cur = (cur[0] + x if rel else x, cur[1])
            elif op == "V":
                (y,) = take(1)
                cur = (cur[0], cur[1] + y if rel else y)
            polylines[-1].append(cur)

        for pl in polylines:
            if len(pl) >= 2:
                self._add_segments(pl, attrs)


def parse_svg(text: str | bytes, tolerance: int = DEFAULT_TOLERANCE,
              default_size: int = DEFAULT_CANVAS) -> VectorPlan:
    """Read a restricted SVG document.

    Malformed markup raises :class:`SvgSyntaxError`. Unsupported content does
    not raise; it is listed in ``plan.issues``.
    """
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise SvgSyntaxError(f"malformed markup: {exc}") from exc
    if _local(root.tag) != "svg":
        raise SvgSyntaxError(f"root element is <{_local(root.tag)}>, expected <svg>")
    reader = _Reader(root, tolerance, default_size)
    reader.walk(root, _attrs(root, {}), "svg")
    return VectorPlan(reader.width, reader.height, tuple(reader.elements), tuple(reader.issues))


def _paint_segment(out: np.ndarray, x1, y1, x2, y2, width, code):
    dx, dy = x2 - x1, y2 - y1
    length = math.hypot(dx, dy)
    half = width / 2.0
    if length <= _EPS or half <= 0:
        return
    h, w = out.shape
    xlo = max(0, math.ceil(min(x1, x2) - half - _EPS))
    xhi = min(w - 1, math.floor(max(x1, x2) + half + _EPS))
    ylo = max(0, math.ceil(min(y1, y2) - half - _EPS))
    yhi = min(h - 1, math.floor(max(y1, y2) + half + _EPS))
    if xlo > xhi or ylo > yhi:
        return
    ys, xs = np.mgrid[ylo:yhi + 1, xlo:xhi + 1]
    px, py = xs - x1, ys - y1
    along = (px * dx + py * dy) / length
    across = np.abs(px * dy - py * dx) / length
    hit = (along >= -_EPS) & (along <= length + _EPS) & (across <= half + _EPS)
    out[ylo:yhi + 1, xlo:xhi + 1][hit] = code


def _paint_box(out: np.ndarray, x0, y0, x1, y1, code):
    """Fill pixels with x0 <= x < x1 and y0 <= y < y1."""
    h, w = out.shape
    c0 = max(0, math.ceil(x0 - _EPS))
    c1 = min(w, math.ceil(x1 - _EPS))
    r0 = max(0, math.ceil(y0 - _EPS))
    r1 = min(h, math.ceil(y1 - _EPS))
    if c0 < c1 and r0 < r1:
        out[r0:r1, c0:c1] = code


def raster_size(plan: VectorPlan) -> tuple[int, int]:
    """Pixel size to rasterize a plan at: its canvas, scaled down if huge."""
    w, h = plan.width, plan.height
    scale = min(1.0, MAX_RASTER_SIDE / max(w, h))
    return max(1, int(round(w * scale))), max(1, int(round(h * scale)))


def rasterize(plan: VectorPlan, out_width: int | None = None, out_height: int | None = None) -> PixelGrid:
    """Paint a plan onto a white grid in list order, without anti-aliasing.

    A pixel (x, y) is sampled at its integer coordinate. Segments cover the
    pixels within ``stroke_width / 2`` of the segment and between its
    endpoints (flat caps); rects and dots cover the half-open box
    ``[x0, x1) x [y0, y1)``.
    """
    if out_width is None or out_height is None:
        out_width, out_height = raster_size(plan)
    if out_width < 1 or out_height < 1:
        raise ValueError("output raster must be at least 1x1")
    sx, sy = out_width / plan.width, out_height / plan.height
    sw = math.sqrt(sx * sy)
    out = np.zeros((out_height, out_width), dtype=np.uint8)
    for el in plan.elements:
        g = el.geometry
        if el.kind is ElementKind.SEGMENT:
            if el.color is not None:
                _paint_segment(out, g[0] * sx, g[1] * sy, g[2] * sx, g[3] * sy, el.stroke_width * sw, el.color)
        elif el.kind is ElementKind.RECT:
            x0, y0, x1, y1 = g[0] * sx, g[1] * sy, (g[0] + g[2]) * sx, (g[1] + g[3]) * sy
            if el.color is not None:
                _paint_box(out, x0, y0, x1, y1, el.color)
            if el.stroke is not None:
                width = el.stroke_width * sw
                for a, b in (((x0, y0), (x1, y0)), ((x1, y0), (x1, y1)),
                             ((x1, y1), (x0, y1)), ((x0, y1), (x0, y0))):
                    _paint_segment(out, *a, *b, width, el.stroke)
        else:
            cx, cy, r = g[0] * sx, g[1] * sy, g[2] * sw / 2.0
            _paint_box(out, cx - r, cy - r, cx + r, cy + r, el.color)
    return PixelGrid(out)
