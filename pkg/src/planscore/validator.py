"""Mechanical checks for the plan drawing rules.

Checked:

* rule 1: every door (green component) touches a wall (black pixel)
* rule 4: the source image had no transparent pixels
* rule 5: no room region reaches the image border
* rule 6: there is at least one red dot, dots are roughly 10x10, each dot
  sits on open floor, and every enclosed area has a dot
* rule 7: no region holds more than one dot
* rule 8: only the four palette colors are used

Rules 2, 3 and 9 are not checked: minimalism and closet-vs-wardrobe are
semantic, and stroke width is not well defined for rasterized diagonals.
Validation never blocks extraction or scoring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import _components as cc
from .raster import ColorClass, PixelGrid

DOT_AREA_MIN = 50
DOT_AREA_MAX = 200
# dotless enclosed pockets smaller than a dot are rasterization debris, not rooms
MIN_ROOM_POCKET = 100

RULES = {
    1: "Walls are black lines; doors are green lines on top of a black line.",
    2: "Ignore windows, exits, furniture; keep the map minimal.",
    3: "Lines are straight and 3 pixels wide.",
    4: "The background is opaque white.",
    5: "Each room is fully enclosed by walls or doors.",
    6: "Each room has one 10x10 red dot in the middle.",
    7: "No path between two red dots avoids black or green pixels.",
    8: "Only pure red, black, white and green are used.",
    9: "Walk-in closets count as rooms; wardrobes do not.",
}


@dataclass(frozen=True)
class RuleViolation:
    rule: int
    description: str
    location: tuple[int, int] | None = None

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unknown rule id {self.rule}")
        if not self.description:
            raise ValueError("violation needs a description")

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "description": self.description,
            "location": list(self.location) if self.location is not None else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RuleViolation":
        loc = d.get("location")
        return cls(int(d["rule"]), str(d["description"]), tuple(int(v) for v in loc) if loc is not None else None)


def _first_pixel(mask: np.ndarray) -> tuple[int, int]:
    ys, xs = np.nonzero(mask)
    return int(xs[0]), int(ys[0])


def validate(grid: PixelGrid) -> list[RuleViolation]:
    out: list[RuleViolation] = []
    classes = grid.classes

    if grid.transparent:
        out.append(RuleViolation(4, "image has transparent pixels; composited over white"))

    other = classes == ColorClass.OTHER
    n_other = int(other.sum())
    if n_other:
        out.append(RuleViolation(8, f"{n_other} off-palette pixel(s)", _first_pixel(other)))

    # red dots
    red_labels, n_red = cc.label(classes == ColorClass.RED, cc.EIGHT)
    blobs: list[tuple[int, int]] = []
    if n_red:
        specks = 0
        for a, mx, my in cc.component_stats(red_labels, n_red).values():
            if a < cc.RED_NOISE_FLOOR:
                specks += 1
                continue
            x, y = cc.round_half_up(mx), cc.round_half_up(my)
            blobs.append((x, y))
            if not DOT_AREA_MIN <= a <= DOT_AREA_MAX:
                out.append(RuleViolation(6, f"red blob of {a} px is not a 10x10 dot", (x, y)))
        if specks:
            out.append(RuleViolation(6, f"{specks} stray red speck(s) below the dot noise floor"))
    if not blobs:
        out.append(RuleViolation(6, "no red room dots found"))

    # green doors must sit on walls
    green_labels, n_green = cc.label(classes == ColorClass.GREEN, cc.EIGHT)
    if n_green:
        black = classes == ColorClass.BLACK
        h, w = classes.shape
        for i, sl in enumerate(ndimage.find_objects(green_labels), start=1):
            y0, y1 = max(0, sl[0].start - 1), min(h, sl[0].stop + 1)
            x0, x1 = max(0, sl[1].start - 1), min(w, sl[1].stop + 1)
            near = ndimage.binary_dilation(green_labels[y0:y1, x0:x1] == i, structure=cc.EIGHT)
            if not (near & black[y0:y1, x0:x1]).any():
                out.append(RuleViolation(1, "green door pixels not on a black wall",
                                         (int(sl[1].start), int(sl[0].start))))

    # regions of open floor
    open_mask = cc.traversable(grid)
    regions, n_regions = cc.label(open_mask, cc.FOUR)
    if n_regions == 0:
        return out
    area = np.bincount(regions.ravel(), minlength=n_regions + 1)
    border = np.zeros(n_regions + 1, dtype=bool)
    border[np.unique(np.concatenate([regions[0], regions[-1], regions[:, 0], regions[:, -1]]))] = True
    dots_in = np.zeros(n_regions + 1, dtype=np.int64)
    first_dot: dict[int, tuple[int, int]] = {}
    for x, y in blobs:
        r = int(regions[y, x])
        if r == 0:
            out.append(RuleViolation(6, "red dot centre lies on a wall or door pixel", (x, y)))
            continue
        dots_in[r] += 1
        first_dot.setdefault(r, (x, y))

    for r in np.nonzero(dots_in > 1)[0]:
        out.append(RuleViolation(7, f"{int(dots_in[r])} red dots share one open region", first_dot[int(r)]))
    for r in np.nonzero((dots_in > 0) & border)[0]:
        out.append(RuleViolation(5, "room region reaches the image border (not enclosed)", first_dot[int(r)]))
    pockets = np.nonzero((dots_in == 0) & ~border & (area >= MIN_ROOM_POCKET))[0]
    pockets = pockets[pockets > 0]
    if len(pockets):
        objects = ndimage.find_objects(regions)
        for r in pockets:
            sl = objects[r - 1]
            out.append(RuleViolation(6, f"enclosed area of {int(area[r])} px has no red dot",
                                     (int(sl[1].start), int(sl[0].start))))
    return out
