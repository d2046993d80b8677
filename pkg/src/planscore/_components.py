"""Connected-component helpers shared by the validator and the extractor."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .raster import ColorClass, PixelGrid

FOUR = ndimage.generate_binary_structure(2, 1)
EIGHT = ndimage.generate_binary_structure(2, 2)

RED_NOISE_FLOOR = 25


def traversable(grid: PixelGrid) -> np.ndarray:
    """Pixels a room flood fill may enter: anything but wall or door."""
    c = grid.classes
    return (c != ColorClass.BLACK) & (c != ColorClass.GREEN)


def label(mask: np.ndarray, structure: np.ndarray) -> tuple[np.ndarray, int]:
    labels, n = ndimage.label(mask, structure=structure)
    return labels, int(n)


def component_stats(labels: np.ndarray, n: int, index=None) -> dict[int, tuple[int, float, float]]:
    """Area, mean x and mean y for components ``index`` (default: all 1..n).

    Works on each component's bounding box, so cost scales with component
    size rather than with the frame.
    """
    objects = ndimage.find_objects(labels, max_label=n)
    out = {}
    for i in (range(1, n + 1) if index is None else index):
        sl = objects[i - 1]
        if sl is None:
            continue
        mask = labels[sl] == i
        cols = mask.sum(axis=0)
        rows = mask.sum(axis=1)
        area = int(cols.sum())
        mx = sl[1].start + float(np.dot(cols, np.arange(len(cols)))) / area
        my = sl[0].start + float(np.dot(rows, np.arange(len(rows)))) / area
        out[i] = (area, mx, my)
    return out


def round_half_up(v: float) -> int:
    return int(np.floor(v + 0.5))


def red_blobs(grid: PixelGrid, floor: int = RED_NOISE_FLOOR) -> list[tuple[int, int, int]]:
    """(x, y, area) for every 8-connected red component of at least ``floor`` pixels.

    Centres are the rounded pixel means; the list is ordered row-major.
    """
    labels, n = label(grid.mask(ColorClass.RED), EIGHT)
    if n == 0:
        return []
    blobs = [
        (round_half_up(mx), round_half_up(my), area)
        for area, mx, my in component_stats(labels, n).values()
        if area >= floor
    ]
    blobs.sort(key=lambda b: (b[1], b[0]))
    return blobs
