"""Turn a classified plan raster into rooms, doors and a connectivity graph."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import _components as cc
from .graph import Door, FloorPlanIR, Orientation, Room, canonical, edges_from_doors, rank_rooms
from .raster import ColorClass, PixelGrid
from .validator import validate

log = logging.getLogger(__name__)

DOOR_PROBE_DEPTH = 4

Point = tuple[int, int]


@dataclass(frozen=True)
class RoomRegion:
    region_id: int
    dots: tuple[Point, ...]
    area: int
    centroid: tuple[float, float]
    touches_border: bool = False


@dataclass(frozen=True)
class DoorRecord:
    door_id: int
    center: tuple[float, float]
    orientation: Orientation
    regions: tuple[int, ...]

    @property
    def anomalous(self) -> bool:
        """A door joining three or more regions sits on a wall junction."""
        return len(self.regions) > 2


@dataclass(frozen=True, eq=False)
class LabelMap:
    """Region id per pixel; -1 where no dot's flood fill reached."""

    labels: np.ndarray

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    def region_at(self, x: int, y: int) -> int | None:
        v = int(self.labels[y, x])
        return None if v < 0 else v


def detect_red_blobs(grid: PixelGrid) -> list[Point]:
    return [(x, y) for x, y, _ in cc.red_blobs(grid)]


def segment_rooms(grid: PixelGrid, dots: list[Point]) -> tuple[LabelMap, list[RoomRegion]]:
    """Flood fill (4-connected) the open floor from every dot.

    Dots that land in the same fill are merged into one region. A dot on a
    wall or door pixel produces no region and is logged.
    """
    components, n = cc.label(cc.traversable(grid), cc.FOUR)
    comp_to_region: dict[int, int] = {}
    region_dots: list[list[Point]] = []
    for x, y in dots:
        comp = int(components[y, x])
        if comp == 0:
            log.info("dot at (%d, %d) lies on a wall/door pixel; no region", x, y)
            continue
        if comp not in comp_to_region:
            comp_to_region[comp] = len(region_dots)
            region_dots.append([])
        region_dots[comp_to_region[comp]].append((x, y))

    lut = np.full(n + 1, -1, dtype=np.int32)
    for comp, rid in comp_to_region.items():
        lut[comp] = rid
    labels = lut[components]
    labels.setflags(write=False)

    regions: list[RoomRegion] = []
    if comp_to_region:
        stats = cc.component_stats(components, n, index=sorted(comp_to_region))
        edge_comps = set(np.unique(np.concatenate(
            [components[0], components[-1], components[:, 0], components[:, -1]])).tolist())
        for comp, rid in sorted(comp_to_region.items(), key=lambda kv: kv[1]):
            area, mx, my = stats[comp]
            regions.append(RoomRegion(
                region_id=rid,
                dots=tuple(region_dots[rid]),
                area=area,
                centroid=(mx, my),
                touches_border=comp in edge_comps,
            ))
    return LabelMap(labels), regions


def detect_doors(grid: PixelGrid, labels: LabelMap) -> list[DoorRecord]:
    """Group green pixels (8-connected) into doors and find the rooms on each side.

    A door is horizontal when its bounding box is at least as wide as tall.
    From every door pixel we step up to DOOR_PROBE_DEPTH pixels outward,
    perpendicular to the door, on both sides; the first labelled pixel on each
    probe names an incident room.
    """
    green, n = cc.label(grid.mask(ColorClass.GREEN), cc.EIGHT)
    if n == 0:
        return []
    objects = ndimage.find_objects(green)
    horizontal = np.zeros(n + 1, dtype=bool)
    for i, sl in enumerate(objects, start=1):
        horizontal[i] = (sl[1].stop - sl[1].start) >= (sl[0].stop - sl[0].start)
    stats = cc.component_stats(green, n)

    ys, xs = np.nonzero(green)
    comp = green[ys, xs]
    horiz_px = horizontal[comp]
    lab = labels.labels
    h, w = lab.shape
    found_comp = []
    found_region = []
    for side in (-1, 1):
        hit = np.full(len(ys), -1, dtype=np.int64)
        for depth in range(1, DOOR_PROBE_DEPTH + 1):
            py = np.where(horiz_px, ys + side * depth, ys)
            px = np.where(horiz_px, xs, xs + side * depth)
            inside = (py >= 0) & (py < h) & (px >= 0) & (px < w)
            probe = np.full(len(ys), -1, dtype=np.int64)
            probe[inside] = lab[py[inside], px[inside]]
            hit = np.where(hit < 0, probe, hit)
        keep = hit >= 0
        found_comp.append(comp[keep])
        found_region.append(hit[keep])
    pairs = np.unique(np.stack([np.concatenate(found_comp), np.concatenate(found_region)], axis=1), axis=0)
    incident: dict[int, list[int]] = {}
    for c, r in pairs.tolist():
        incident.setdefault(c, []).append(r)

    doors = []
    for i in range(1, n + 1):
        rec = DoorRecord(
            door_id=i - 1,
            center=(stats[i][1], stats[i][2]),
            orientation=Orientation.HORIZONTAL if horizontal[i] else Orientation.VERTICAL,
            regions=tuple(sorted(incident.get(i, ()))),
        )
        if rec.anomalous:
            log.info("door %d at %s touches %d regions", rec.door_id, rec.center, len(rec.regions))
        doors.append(rec)
    return doors


def extract(grid: PixelGrid, check: bool = True) -> FloorPlanIR:
    """Full extraction: dots, regions, doors, size ranks, edges.

    Never raises on malformed plans. With ``check`` the validator's findings
    are attached to the IR.
    """
    dots = detect_red_blobs(grid)
    labels, regions = segment_rooms(grid, dots)
    doors = detect_doors(grid, labels)
    rank = rank_rooms(regions)
    rooms = tuple(Room(rank[r.region_id], r.area, r.centroid) for r in regions)
    ir_doors = tuple(
        Door(d.center, d.orientation, tuple(sorted(rank[r] for r in d.regions))) for d in doors
    )
    violations = tuple(validate(grid)) if check else ()
    return canonical(FloorPlanIR(rooms, ir_doors, edges_from_doors(ir_doors), violations))
