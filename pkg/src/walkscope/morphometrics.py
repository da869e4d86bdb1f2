"""Width, angle, and curvature at skeleton points, and their per-tile averages."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .raster_io import SIDEWALK, ClassMask
from .skeleton import Skeleton, SkeletonPath, _degree_map, thin, trace_paths

logger = logging.getLogger(__name__)

DEFAULT_H = 5


@dataclass(frozen=True)
class DistanceField:
    dist: np.ndarray  # float64, 0 on background

    @property
    def height(self) -> int:
        return self.dist.shape[0]

    @property
    def width(self) -> int:
        return self.dist.shape[1]


@dataclass(frozen=True)
class PointMeasure:
    point: tuple[int, int]
    width: float
    angle: float | None  # degrees in [0, 180), None when the path is too short
    curvature: float | None  # 1/pixels, None without both +-h neighbors
    h: int


@dataclass(frozen=True)
class TileMetrics:
    tile_id: str
    mean_width: float
    mean_angle: float
    mean_curvature: float
    n_points: int
    defined: bool


def distance_transform(bits: np.ndarray) -> DistanceField:
    """Exact Euclidean distance to the nearest background pixel center.

    Pixels beyond the grid edge count as background, hence the 1-pixel pad.
    """
    padded = np.pad(bits.astype(bool), 1)
    dist = ndimage.distance_transform_edt(padded)[1:-1, 1:-1]
    return DistanceField(dist=dist)


def width_at(field: DistanceField, point: tuple[int, int]) -> float:
    """Shape width at a skeleton point: twice the border distance.

    The border lies half a pixel inside the nearest background center, so a
    centerline distance d spans 2*d - 1 pixels of foreground.
    """
    d = field.dist[point]
    if d <= 0:
        raise ValueError(f"point {point} is not foreground")
    return 2.0 * d - 1.0


def _chord_angle(a: tuple[int, int], c: tuple[int, int]) -> float | None:
    dr = c[0] - a[0]
    dc = c[1] - a[1]
    if dr == 0 and dc == 0:
        return None
    # image rows grow downward; angles measured from the x-axis, y up
    return math.degrees(math.atan2(-dr, dc)) % 180.0


def angle_at(path: SkeletonPath, i: int, h: int) -> float | None:
    """Chord orientation in degrees [0, 180) at path point i.

    Central difference over +-h path steps where both sides exist,
    one-sided otherwise; None when the path is too short on both sides.
    """
    pts = path.points
    n = len(pts)
    if path.closed:
        if n < 2:
            return None
        return _chord_angle(pts[(i - h) % n], pts[(i + h) % n])
    lo = i - h
    hi = i + h
    if lo >= 0 and hi < n:
        return _chord_angle(pts[lo], pts[hi])
    if lo >= 0:
        return _chord_angle(pts[lo], pts[i])
    if hi < n:
        return _chord_angle(pts[i], pts[hi])
    return None


def curvature_at(path: SkeletonPath, i: int, h: int) -> float | None:
    """Inverse circumradius of (path[i-h], path[i], path[i+h]).

    Collinear triples give 0; coincident points give None (skipped).
    Requires neighbors at +-h; returns None at path ends.
    """
    pts = path.points
    n = len(pts)
    if path.closed:
        if n < 3:
            return None
        a = pts[(i - h) % n]
        c = pts[(i + h) % n]
    else:
        if i - h < 0 or i + h >= n:
            return None
        a = pts[i - h]
        c = pts[i + h]
    b = pts[i]
    return _circumradius_curvature(a, b, c)


def _circumradius_curvature(a, b, c) -> float | None:
    cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    ab = math.hypot(b[0] - a[0], b[1] - a[1])
    bc = math.hypot(c[0] - b[0], c[1] - b[1])
    ca = math.hypot(a[0] - c[0], a[1] - c[1])
    if ab == 0.0 or bc == 0.0 or ca == 0.0:
        return None
    if cross == 0.0:
        return 0.0
    return 4.0 * (abs(cross) / 2.0) / (ab * bc * ca)


def curvature_of_triple(a: tuple[float, float], b: tuple[float, float],
                        c: tuple[float, float]) -> float | None:
    """Circumradius curvature of three explicit points (same formula as curvature_at)."""
    return _circumradius_curvature(a, b, c)


def measure_path(path: SkeletonPath, field: DistanceField, h: int = DEFAULT_H,
                 junctions: frozenset | None = None) -> list[PointMeasure]:
    """Per-point measurements along one path; junction pixels are skipped."""
    out = []
    for i, p in enumerate(path.points):
        if junctions and p in junctions:
            continue
        out.append(PointMeasure(
            point=p,
            width=width_at(field, p),
            angle=angle_at(path, i, h),
            curvature=curvature_at(path, i, h),
            h=h,
        ))
    return out


def measure_mask(bits: np.ndarray, h: int = DEFAULT_H,
                 prune_len: int = 3) -> tuple[list[PointMeasure], Skeleton]:
    """Thin a binary mask, trace it, and measure every non-junction skeleton point."""
    skel = thin(bits, prune_len=prune_len)
    field = distance_transform(bits)
    paths = trace_paths(skel)
    junctions = _junction_set(skel)
    measures: list[PointMeasure] = []
    for path in paths:
        measures.extend(measure_path(path, field, h, junctions))
    return measures, skel


def _junction_set(skel: Skeleton) -> frozenset:
    deg = _degree_map(skel.bits)
    return frozenset(tuple(p) for p in np.argwhere(deg >= 3).tolist())


def summarize_measures(measures: list[PointMeasure], tile_id: str = "") -> TileMetrics:
    """Fold point measures into per-tile means.

    Width is averaged over every traced point; angle and curvature only over
    points where they are defined. n_points counts traced points; defined is
    False when there are none.
    """
    if not measures:
        return TileMetrics(tile_id=tile_id, mean_width=float("nan"),
                           mean_angle=float("nan"), mean_curvature=float("nan"),
                           n_points=0, defined=False)
    widths = [m.width for m in measures]
    angles = [m.angle for m in measures if m.angle is not None]
    curvatures = [m.curvature for m in measures if m.curvature is not None]
    return TileMetrics(
        tile_id=tile_id,
        mean_width=math.fsum(widths) / len(widths),
        mean_angle=math.fsum(angles) / len(angles) if angles else float("nan"),
        mean_curvature=math.fsum(curvatures) / len(curvatures) if curvatures else float("nan"),
        n_points=len(measures),
        defined=True,
    )


def tile_metrics(mask: ClassMask | np.ndarray, h: int = DEFAULT_H,
                 tile_id: str = "", prune_len: int = 3) -> TileMetrics:
    """Per-tile averages of the three measurements over all measurable points."""
    bits = mask.bits if isinstance(mask, ClassMask) else np.asarray(mask, dtype=bool)
    measures, _ = measure_mask(bits, h=h, prune_len=prune_len)
    return summarize_measures(measures, tile_id)


def sidewalk_metrics(raster_labels: np.ndarray, h: int = DEFAULT_H,
                     tile_id: str = "", prune_len: int = 3) -> TileMetrics:
    """tile_metrics for the sidewalk class of a label grid."""
    return tile_metrics(raster_labels == SIDEWALK, h=h, tile_id=tile_id, prune_len=prune_len)
