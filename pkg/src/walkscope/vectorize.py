"""Polygon layers, rectangle clipping, and burning vectors into annotation rasters."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .raster_io import BUILDING, ROAD, SIDEWALK, Geotransform, TileRaster

logger = logging.getLogger(__name__)

Point = tuple[float, float]
Ring = list[Point]

CLASS_BY_NAME = {"background": 0, "building": BUILDING, "road": ROAD, "sidewalk": SIDEWALK}
# burn order: lowest priority first so later classes overwrite earlier ones
BURN_ORDER = (BUILDING, ROAD, SIDEWALK)


class CrsMismatchError(Exception):
    """Layers and extents must agree on the coordinate reference system."""


@dataclass(frozen=True)
class VectorLayer:
    features: list[tuple[list[Ring], int]]  # ([outer, *holes], class_id)
    crs_id: str


@dataclass(frozen=True)
class TileExtent:
    min_x: float
    min_y: float
    max_x: float
    max_y: float
    tile_id: str
    crs_id: str = ""

    def __post_init__(self) -> None:
        if self.min_x >= self.max_x or self.min_y >= self.max_y:
            raise ValueError(f"degenerate extent for tile {self.tile_id}")


def ring_area(ring: Ring) -> float:
    """Shoelace area, positive regardless of orientation."""
    s = 0.0
    n = len(ring)
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        s += x1 * y2 - x2 * y1
    return abs(s) / 2.0


def polygon_area(rings: list[Ring]) -> float:
    """Outer ring area minus hole areas."""
    if not rings:
        return 0.0
    area = ring_area(rings[0])
    for hole in rings[1:]:
        area -= ring_area(hole)
    return area


def clip_ring(ring: Ring, extent: TileExtent) -> Ring:
    """Sutherland-Hodgman clip of one ring against the extent rectangle."""

    def clip_half(points: Ring, inside, intersect) -> Ring:
        out: Ring = []
        n = len(points)
        for i in range(n):
            cur = points[i]
            prev = points[i - 1]
            cur_in = inside(cur)
            prev_in = inside(prev)
            if cur_in:
                if not prev_in:
                    out.append(intersect(prev, cur))
                out.append(cur)
            elif prev_in:
                out.append(intersect(prev, cur))
        return out

    def x_cross(p, q, x):
        t = (x - p[0]) / (q[0] - p[0])
        return (x, p[1] + t * (q[1] - p[1]))

    def y_cross(p, q, y):
        t = (y - p[1]) / (q[1] - p[1])
        return (p[0] + t * (q[0] - p[0]), y)

    out = ring
    for inside, intersect in (
        (lambda p: p[0] >= extent.min_x, lambda p, q: x_cross(p, q, extent.min_x)),
        (lambda p: p[0] <= extent.max_x, lambda p, q: x_cross(p, q, extent.max_x)),
        (lambda p: p[1] >= extent.min_y, lambda p, q: y_cross(p, q, extent.min_y)),
        (lambda p: p[1] <= extent.max_y, lambda p, q: y_cross(p, q, extent.max_y)),
    ):
        out = clip_half(out, inside, intersect)
        if not out:
            return []
    return out


def clip_layer(layer: VectorLayer, extent: TileExtent) -> VectorLayer:
    """Intersect every polygon with the extent rectangle; drop empty results."""
    if extent.crs_id and layer.crs_id and extent.crs_id != layer.crs_id:
        raise CrsMismatchError(f"layer crs {layer.crs_id!r} vs extent crs {extent.crs_id!r}")
    features = []
    for rings, class_id in layer.features:
        clipped = [clip_ring(r, extent) for r in rings]
        clipped = [r for r in clipped if len(r) >= 3 and ring_area(r) > 0]
        if clipped and ring_area(clipped[0]) > 0:
            features.append((clipped, class_id))
    return VectorLayer(features=features, crs_id=layer.crs_id)


def geotransform_for(extent: TileExtent, width: int, height: int) -> Geotransform:
    return Geotransform(
        origin_x=extent.min_x,
        origin_y=extent.max_y,
        pixel_size_x=(extent.max_x - extent.min_x) / width,
        pixel_size_y=-(extent.max_y - extent.min_y) / height,
        crs_id=extent.crs_id,
    )


def _burn_rings(target: np.ndarray, rings: list[Ring], gt: Geotransform, value: int) -> None:
    """Even-odd scanline fill at pixel centers; crossings at or left of a center count."""
    height, width = target.shape
    col_xs = gt.origin_x + (np.arange(width) + 0.5) * gt.pixel_size_x
    for row in range(height):
        _, yc = gt.pixel_to_world(row, 0)
        crossings: list[float] = []
        for ring in rings:
            n = len(ring)
            for i in range(n):
                x1, y1 = ring[i]
                x2, y2 = ring[(i + 1) % n]
                if y1 == y2:
                    continue  # horizontal edges contribute no parity change
                lo, hi = (y1, y2) if y1 < y2 else (y2, y1)
                if lo <= yc < hi:
                    crossings.append(x1 + (yc - y1) / (y2 - y1) * (x2 - x1))
        if not crossings:
            continue
        crossings.sort()
        inside = np.searchsorted(crossings, col_xs, side="right") % 2 == 1
        target[row, inside] = value


def rasterize(layers: list[VectorLayer], extent: TileExtent,
              width: int, height: int) -> TileRaster:
    """Burn layers into a class-labeled raster over the extent.

    A pixel takes the class of the highest-priority polygon covering its
    center; priority sidewalk > road > building > background.
    """
    if width <= 0 or height <= 0:
        raise ValueError(f"bad raster dimensions {width}x{height}")
    gt = geotransform_for(extent, width, height)
    labels = np.zeros((height, width), dtype=np.uint8)
    by_class: dict[int, list[list[Ring]]] = {}
    for layer in layers:
        clipped = clip_layer(layer, extent)
        for rings, class_id in clipped.features:
            by_class.setdefault(class_id, []).append(rings)
    for class_id in BURN_ORDER:
        for rings in by_class.get(class_id, []):
            _burn_rings(labels, rings, gt, class_id)
    return TileRaster(labels=labels, geotransform=gt, tile_id=extent.tile_id)


def load_vector_layer(path: str | Path, class_property: str = "class",
                      fixed_class: int | None = None) -> VectorLayer:
    """Read a GeoJSON-style feature collection of polygons.

    Each feature's class comes from properties[class_property] (name or id)
    unless fixed_class pins the whole file to one class.
    """
    raw = json.loads(Path(path).read_text())
    crs_id = str(raw.get("crs_id", ""))
    features: list[tuple[list[Ring], int]] = []
    for feat in raw.get("features", []):
        geom = feat.get("geometry", {})
        gtype = geom.get("type")
        if gtype == "Polygon":
            polys = [geom.get("coordinates", [])]
        elif gtype == "MultiPolygon":
            polys = geom.get("coordinates", [])
        else:
            logger.warning("skipping non-polygon feature in %s: %s", path, gtype)
            continue
        if fixed_class is not None:
            class_id = fixed_class
        else:
            value = feat.get("properties", {}).get(class_property)
            if isinstance(value, str):
                class_id = CLASS_BY_NAME.get(value.lower())
                if class_id is None:
                    raise ValueError(f"unknown class name {value!r} in {path}")
            elif isinstance(value, (int, float)) and int(value) in (0, 1, 2, 3):
                class_id = int(value)
            else:
                raise ValueError(f"feature in {path} lacks a usable {class_property!r} property")
        for rings in polys:
            rings = [[(float(x), float(y)) for x, y in ring] for ring in rings]
            rings = [r for r in rings if len(r) >= 3]
            if rings and ring_area(rings[0]) > 0:
                features.append((rings, class_id))
    return VectorLayer(features=features, crs_id=crs_id)


def load_extents(path: str | Path) -> list[TileExtent]:
    """Read a tile-extent manifest: a JSON list of tile descriptors."""
    raw = json.loads(Path(path).read_text())
    extents = []
    for item in raw:
        psx = float(item["pixel_size_x"])
        psy = float(item["pixel_size_y"])
        ox = float(item["origin_x"])
        oy = float(item["origin_y"])
        w = int(item["width"])
        h = int(item["height"])
        xs = (ox, ox + w * psx)
        ys = (oy, oy + h * psy)
        extents.append(TileExtent(
            min_x=min(xs), max_x=max(xs), min_y=min(ys), max_y=max(ys),
            tile_id=str(item["tile_id"]), crs_id=str(item.get("crs_id", "")),
        ))
    return extents


def manifest_dimensions(path: str | Path) -> dict[str, tuple[int, int]]:
    """tile_id -> (height, width) from the same manifest."""
    raw = json.loads(Path(path).read_text())
    return {str(item["tile_id"]): (int(item["height"]), int(item["width"])) for item in raw}
