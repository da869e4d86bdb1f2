"""Sidewalk morphometrics from class-labeled raster tiles.

Width, angle, and curvature are measured along the skeleton of the sidewalk
class, scored against ground truth, and aggregated by land use.
"""
from .aggregate import (LandUseAggregate, LandUseLayer, aggregate_by_landuse,
                        landuse_join, load_landuse_layer)
from .evaluation import (BinnedRmseRow, BinSpec, ClassScores, ConfusionMatrix,
                         binned_rmse, confusion, default_bin_spec, scores)
from .morphometrics import (DEFAULT_H, DistanceField, PointMeasure, TileMetrics,
                            angle_at, curvature_at, curvature_of_triple,
                            distance_transform, measure_mask, measure_path,
                            sidewalk_metrics, summarize_measures, tile_metrics,
                            width_at)
from .raster_io import (BACKGROUND, BUILDING, CLASS_IDS, CLASS_NAMES, PALETTE,
                        ROAD, SIDEWALK, ClassMask, Geotransform, TileRaster,
                        extract_class_mask, load_sidecar, load_tile, read_labels,
                        render_overlay, save_overlay, save_sidecar, save_tile)
from .skeleton import Skeleton, SkeletonPath, thin, trace_paths
from .synth import GroundTruth, RibbonSpec, emit_fixtures, make_ribbon, make_tile
from .vectorize import (TileExtent, VectorLayer, clip_layer, clip_ring,
                        load_extents, load_vector_layer, polygon_area, rasterize,
                        ring_area)

__version__ = "0.1.0"

__all__ = [
    "BACKGROUND", "BUILDING", "ROAD", "SIDEWALK", "CLASS_IDS", "CLASS_NAMES",
    "PALETTE", "DEFAULT_H",
    "Geotransform", "TileRaster", "ClassMask", "Skeleton", "SkeletonPath",
    "DistanceField", "PointMeasure", "TileMetrics", "ConfusionMatrix",
    "ClassScores", "BinSpec", "BinnedRmseRow", "TileExtent", "VectorLayer",
    "LandUseLayer", "LandUseAggregate", "RibbonSpec", "GroundTruth",
    "extract_class_mask", "load_tile", "save_tile", "read_labels",
    "load_sidecar", "save_sidecar", "render_overlay", "save_overlay",
    "thin", "trace_paths",
    "distance_transform", "width_at", "angle_at", "curvature_at",
    "curvature_of_triple", "measure_path", "measure_mask", "summarize_measures",
    "tile_metrics", "sidewalk_metrics",
    "confusion", "scores", "binned_rmse", "default_bin_spec",
    "clip_ring", "clip_layer", "ring_area", "polygon_area", "rasterize",
    "load_vector_layer", "load_extents",
    "load_landuse_layer", "landuse_join", "aggregate_by_landuse",
    "make_ribbon", "make_tile", "emit_fixtures",
    "__version__",
]
