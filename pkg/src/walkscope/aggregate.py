"""Land-use assignment of tiles by spatial join and per-category metric aggregation."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

from .morphometrics import TileMetrics
from .vectorize import CrsMismatchError, Ring, TileExtent, clip_ring, polygon_area, ring_area

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LandUseLayer:
    features: list[tuple[list[Ring], str]]  # ([outer, *holes], category)
    crs_id: str


@dataclass(frozen=True)
class LandUseAggregate:
    category: str
    n_tiles: int
    mean_width: float
    mean_angle: float
    mean_curvature: float


def load_landuse_layer(path: str | Path, category_property: str = "category") -> LandUseLayer:
    raw = json.loads(Path(path).read_text())
    crs_id = str(raw.get("crs_id", ""))
    features: list[tuple[list[Ring], str]] = []
    for feat in raw.get("features", []):
        geom = feat.get("geometry", {})
        gtype = geom.get("type")
        if gtype == "Polygon":
            polys = [geom.get("coordinates", [])]
        elif gtype == "MultiPolygon":
            polys = geom.get("coordinates", [])
        else:
            logger.warning("skipping non-polygon land-use feature: %s", gtype)
            continue
        category = feat.get("properties", {}).get(category_property)
        if not isinstance(category, str) or not category:
            raise ValueError(f"land-use feature in {path} lacks a {category_property!r} string")
        for rings in polys:
            rings = [[(float(x), float(y)) for x, y in ring] for ring in rings]
            rings = [r for r in rings if len(r) >= 3]
            if rings and ring_area(rings[0]) > 0:
                features.append((rings, category))
    return LandUseLayer(features=features, crs_id=crs_id)


def _clipped_area(rings: list[Ring], extent: TileExtent) -> float:
    clipped = [clip_ring(r, extent) for r in rings]
    clipped = [r for r in clipped if len(r) >= 3]
    return polygon_area(clipped) if clipped else 0.0


def _centroid(ring: Ring) -> tuple[float, float]:
    a = 0.0
    cx = 0.0
    cy = 0.0
    n = len(ring)
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        w = x1 * y2 - x2 * y1
        a += w
        cx += (x1 + x2) * w
        cy += (y1 + y2) * w
    if a == 0.0:
        xs = [p[0] for p in ring]
        ys = [p[1] for p in ring]
        return sum(xs) / n, sum(ys) / n
    return cx / (3.0 * a), cy / (3.0 * a)


def landuse_join(extents: list[TileExtent], lu: LandUseLayer,
                 rule: str = "majority") -> dict[str, str]:
    """Assign each tile the land-use category with the largest clipped area.

    Ties break lexicographically by category name. rule="centroid" instead
    assigns the category whose polygon covers the tile's center point.
    Tiles touching nothing stay unassigned (absent from the result).
    """
    if rule not in ("majority", "centroid"):
        raise ValueError(f"unknown join rule {rule!r}")
    assignment: dict[str, str] = {}
    for extent in extents:
        if extent.crs_id and lu.crs_id and extent.crs_id != lu.crs_id:
            raise CrsMismatchError(
                f"tile {extent.tile_id} crs {extent.crs_id!r} vs land use {lu.crs_id!r}"
            )
        if rule == "centroid":
            cx = (extent.min_x + extent.max_x) / 2.0
            cy = (extent.min_y + extent.max_y) / 2.0
            for rings, category in lu.features:
                if _point_in_rings(cx, cy, rings):
                    assignment[extent.tile_id] = category
                    break
            continue
        areas: dict[str, float] = {}
        for rings, category in lu.features:
            a = _clipped_area(rings, extent)
            if a > 0.0:
                areas[category] = areas.get(category, 0.0) + a
        if areas:
            # largest area wins; ties fall to the lexicographically first name
            best = min(areas.items(), key=lambda kv: (-kv[1], kv[0]))
            assignment[extent.tile_id] = best[0]
    return assignment


def _point_in_rings(x: float, y: float, rings: list[Ring]) -> bool:
    inside = False
    for ring in rings:
        n = len(ring)
        for i in range(n):
            x1, y1 = ring[i]
            x2, y2 = ring[(i + 1) % n]
            if y1 == y2:
                continue
            lo, hi = (y1, y2) if y1 < y2 else (y2, y1)
            if lo <= y < hi:
                cross = x1 + (y - y1) / (y2 - y1) * (x2 - x1)
                if cross <= x:
                    inside = not inside
    return inside


def aggregate_by_landuse(metrics: list[TileMetrics],
                         assignment: dict[str, str]) -> list[LandUseAggregate]:
    """Unweighted per-category means of tile-level means.

    Undefined tiles and unassigned tiles are skipped; categories without any
    contributing tile are omitted. Rows come back sorted by category name.
    """
    by_cat: dict[str, list[TileMetrics]] = {}
    for m in metrics:
        if not m.defined:
            continue
        cat = assignment.get(m.tile_id)
        if cat is None:
            continue
        by_cat.setdefault(cat, []).append(m)
    out = []
    for cat in sorted(by_cat):
        tiles = by_cat[cat]
        widths = [t.mean_width for t in tiles if math.isfinite(t.mean_width)]
        angles = [t.mean_angle for t in tiles if math.isfinite(t.mean_angle)]
        curvatures = [t.mean_curvature for t in tiles if math.isfinite(t.mean_curvature)]
        out.append(LandUseAggregate(
            category=cat,
            n_tiles=len(tiles),
            mean_width=math.fsum(widths) / len(widths) if widths else float("nan"),
            mean_angle=math.fsum(angles) / len(angles) if angles else float("nan"),
            mean_curvature=math.fsum(curvatures) / len(curvatures) if curvatures else float("nan"),
        ))
    return out
