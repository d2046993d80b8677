"""Raster loading and palette classification.

Every pixel of a plan image is snapped to one of five classes. Four of them
are the palette colors a compliant plan may use; everything else is ``OTHER``.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

DEFAULT_TOLERANCE = 48


class ColorClass(enum.IntEnum):
    WHITE = 0
    BLACK = 1
    GREEN = 2
    RED = 3
    OTHER = 4


PALETTE: dict[ColorClass, tuple[int, int, int]] = {
    ColorClass.WHITE: (255, 255, 255),
    ColorClass.BLACK: (0, 0, 0),
    ColorClass.RED: (255, 0, 0),
    ColorClass.GREEN: (0, 255, 0),
}

_PALETTE_ORDER = list(PALETTE)
_PALETTE_RGB = np.array([PALETTE[c] for c in _PALETTE_ORDER], dtype=np.int16)


class ImageLoadError(Exception):
    """Base class for failures to turn a file into a PixelGrid."""


class ImageMissingError(ImageLoadError):
    pass


class ImageDecodeError(ImageLoadError):
    pass


class EmptyImageError(ImageLoadError):
    pass


@dataclass(frozen=True, eq=False)
class PixelGrid:
    """Classified raster. ``classes[y, x]`` holds the ColorClass code of pixel (x, y).

    ``transparent`` records whether the source image had any non-opaque pixel,
    so the validator can flag it even though the pixel was composited to white.
    """

    classes: np.ndarray
    transparent: bool = field(default=False)

    def __post_init__(self):
        arr = np.ascontiguousarray(self.classes, dtype=np.uint8)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"PixelGrid needs a non-empty 2-D array, got shape {arr.shape}")
        if arr.size and arr.max() > max(ColorClass):
            raise ValueError("PixelGrid cells must be ColorClass codes")
        arr.setflags(write=False)
        object.__setattr__(self, "classes", arr)

    @property
    def width(self) -> int:
        return self.classes.shape[1]

    @property
    def height(self) -> int:
        return self.classes.shape[0]

    @property
    def cells(self) -> np.ndarray:
        """Row-major flat view: pixel (x, y) is ``cells[y * width + x]``."""
        return self.classes.ravel()

    def at(self, x: int, y: int) -> ColorClass:
        return ColorClass(int(self.classes[y, x]))

    def mask(self, cls: ColorClass) -> np.ndarray:
        return self.classes == cls

    def __eq__(self, other):
        if not isinstance(other, PixelGrid):
            return NotImplemented
        return self.classes.shape == other.classes.shape and bool(
            np.array_equal(self.classes, other.classes)
        )

    def __hash__(self):
        return hash((self.classes.shape, self.classes.tobytes()))

    @classmethod
    def blank(cls, width: int, height: int) -> "PixelGrid":
        return cls(np.zeros((height, width), dtype=np.uint8))

    def to_rgb(self) -> np.ndarray:
        """Render back to exact palette colors; OTHER becomes mid grey."""
        lut = np.array(
            [PALETTE[ColorClass(i)] if ColorClass(i) in PALETTE else (128, 128, 128) for i in range(5)],
            dtype=np.uint8,
        )
        return lut[self.classes]


def classify_color(r: int, g: int, b: int, tolerance: int = DEFAULT_TOLERANCE) -> ColorClass:
    dist = np.abs(_PALETTE_RGB - np.array([r, g, b], dtype=np.int16)).max(axis=1)
    best = int(np.argmin(dist))
    if dist[best] <= tolerance:
        return _PALETTE_ORDER[best]
    return ColorClass.OTHER


def classify_rgb(rgb: np.ndarray, tolerance: int = DEFAULT_TOLERANCE) -> np.ndarray:
    """Vectorised :func:`classify_color` over an (..., 3) uint8 array."""
    rgb = np.asarray(rgb, dtype=np.uint8)
    planes = [np.ascontiguousarray(rgb[..., c]) for c in range(3)]
    levels = np.arange(256, dtype=np.int16)
    if tolerance < 128:
        return _classify_banded(planes, levels, tolerance)
    out = np.full(rgb.shape[:-1], ColorClass.OTHER, dtype=np.uint8)
    best = np.full(rgb.shape[:-1], 255, dtype=np.uint8)
    claimed = np.zeros(rgb.shape[:-1], dtype=bool)
    for cls, ref in zip(_PALETTE_ORDER, _PALETTE_RGB):
        # per-channel distance tables keep everything in uint8
        luts = [np.abs(levels - int(v)).astype(np.uint8) for v in ref]
        dist = np.maximum(np.maximum(luts[0][planes[0]], luts[1][planes[1]]), luts[2][planes[2]])
        hit = (dist <= tolerance) & ((dist < best) | ~claimed)
        out[hit] = cls
        best[hit] = dist[hit]
        claimed |= hit
    return out


def _classify_banded(planes, levels, tolerance: int) -> np.ndarray:
    # Below 128 the "near 0" and "near 255" bands are disjoint, so each channel
    # reduces to one of three bands and at most one palette color can match.
    band = np.full(256, 2, dtype=np.uint8)
    band[levels <= tolerance] = 0
    band[levels >= 255 - tolerance] = 1
    table = np.full(27, ColorClass.OTHER, dtype=np.uint8)
    for cls, ref in zip(_PALETTE_ORDER, _PALETTE_RGB):
        r, g, b = (int(v == 255) for v in ref)
        table[r * 9 + g * 3 + b] = cls
    code = band[planes[0]] * np.uint8(9)
    code += band[planes[1]] * np.uint8(3)
    code += band[planes[2]]
    return table[code]


def load_image(path: str | os.PathLike, tolerance: int = DEFAULT_TOLERANCE) -> PixelGrid:
    path = Path(path)
    if not path.is_file():
        raise ImageMissingError(f"no such image file: {path}")
    try:
        with Image.open(path) as img:
            img.load()
            if img.width == 0 or img.height == 0:
                raise EmptyImageError(f"image has zero size: {path}")
            rgba = np.asarray(img.convert("RGBA"))
    except (UnidentifiedImageError, Image.DecompressionBombError, OSError, SyntaxError, ValueError) as exc:
        raise ImageDecodeError(f"cannot decode {path}: {exc}") from exc
    if rgba.size == 0:
        raise EmptyImageError(f"image has zero size: {path}")
    return grid_from_rgba(rgba, tolerance)


def grid_from_rgba(rgba: np.ndarray, tolerance: int = DEFAULT_TOLERANCE) -> PixelGrid:
    rgba = np.asarray(rgba)
    if rgba.shape[-1] == 3:
        return PixelGrid(classify_rgb(rgba.astype(np.uint8), tolerance))
    if (rgba[..., 3] == 255).all():
        return PixelGrid(classify_rgb(rgba[..., :3].astype(np.uint8), tolerance))
    alpha = rgba[..., 3:4].astype(np.float64) / 255.0
    # composite over white
    rgb = np.rint(rgba[..., :3] * alpha + 255.0 * (1.0 - alpha)).astype(np.uint8)
    return PixelGrid(classify_rgb(rgb, tolerance), transparent=True)


def save_grid(grid: PixelGrid, path: str | os.PathLike) -> None:
    Image.fromarray(grid.to_rgb()).save(path)
