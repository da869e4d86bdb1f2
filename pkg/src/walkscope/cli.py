"""Command line driving the tile pipeline: rasterize, analyze, evaluate, aggregate, render, synth."""
from __future__ import annotations

import argparse
import json
import logging
import math
import multiprocessing
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import reports
from .aggregate import aggregate_by_landuse, landuse_join, load_landuse_layer
from .evaluation import (BinSpec, ClassScores, ConfusionMatrix, binned_rmse,
                         confusion, default_bin_spec, scores)
from .morphometrics import DEFAULT_H, TileMetrics, measure_mask, summarize_measures
from .raster_io import (SIDEWALK, Geotransform, InvalidLabelError, RasterError,
                        TileRaster, read_labels, save_overlay, save_tile)
from .synth import emit_fixtures
from .vectorize import (CrsMismatchError, load_extents, load_vector_layer,
                        manifest_dimensions, rasterize)

logger = logging.getLogger(__name__)

REPORT_FEATURES = ("width", "angle", "curvature")

_NO_GEO = Geotransform(origin_x=0.0, origin_y=0.0, pixel_size_x=1.0,
                       pixel_size_y=-1.0, crs_id="")


class CliError(Exception):
    """Bad invocation or config; maps to exit status 2."""


@dataclass(frozen=True)
class RunConfig:
    """One run's inputs and knobs; commands read the fields they need."""
    gt_dir: Path | None = None
    pred_dir: Path | None = None
    vectors: tuple[Path, ...] = ()
    extents_path: Path | None = None
    landuse_path: Path | None = None
    out_dir: Path = Path("out")
    h: int = DEFAULT_H
    prune: int = 3
    workers: int = 1
    fmt: str = "csv"
    bins: dict[str, BinSpec] = field(
        default_factory=lambda: {f: default_bin_spec(f) for f in REPORT_FEATURES})
    class_property: str = "class"
    category_property: str = "category"
    join_rule: str = "majority"
    score_mode: str = "accumulate"
    figures: bool = True
    points: bool = False
    stamp: bool = False
    count: int = 0
    size: int = 512
    seed: int = 0

    def __post_init__(self) -> None:
        if self.h < 2:
            raise CliError(f"h must be at least 2, got {self.h}")
        if self.workers < 1:
            raise CliError(f"workers must be at least 1, got {self.workers}")
        if self.fmt not in ("csv", "json"):
            raise CliError(f"format must be csv or json, got {self.fmt!r}")
        if self.join_rule not in ("majority", "centroid"):
            raise CliError(f"join rule must be majority or centroid, got {self.join_rule!r}")
        if self.score_mode not in ("accumulate", "per-tile"):
            raise CliError(f"score mode must be accumulate or per-tile, got {self.score_mode!r}")


def _require(cfg: RunConfig, attr: str, flag: str) -> Path:
    value = getattr(cfg, attr)
    if value is None:
        raise CliError(f"this command needs {flag}")
    path = Path(value)
    if not path.exists():
        raise CliError(f"{flag} path does not exist: {path}")
    return path


# ---------------------------------------------------------------------------
# tile discovery and worker-pool plumbing

def _discover_tiles(directory: Path) -> list[tuple[str, Path]]:
    """(tile_id, path) pairs for every raster in a directory, sorted by id."""
    found: dict[str, Path] = {}
    for pattern in ("*.png", "*.pgm"):
        for p in directory.glob(pattern):
            found.setdefault(p.stem, p)
    return sorted(found.items())


def _map_tiles(fn, tasks: list, workers: int) -> list:
    """Run fn over tasks, in a pool when workers > 1. Order is preserved."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (workers * 4))
    with multiprocessing.Pool(processes=workers) as pool:
        return pool.map(fn, tasks, chunksize=chunk)


def _sidewalk_measures(labels, h: int, prune: int, tile_id: str):
    if labels.size and int(labels.max()) > SIDEWALK:
        raise InvalidLabelError(
            f"tile {tile_id} holds label {int(labels.max())}, outside 0..{SIDEWALK}")
    measures, _ = measure_mask(labels == SIDEWALK, h=h, prune_len=prune)
    return measures


def _analyze_task(task):
    """(tile_id, path, h, prune, want_points) -> (tile_id, metrics, points, error)."""
    tile_id, path, h, prune, want_points = task
    try:
        labels = read_labels(Path(path))
        measures = _sidewalk_measures(labels, h, prune, tile_id)
        metrics = summarize_measures(measures, tile_id)
        points = None
        if want_points:
            points = [(m.point[0], m.point[1], m.width, m.angle, m.curvature)
                      for m in measures]
        return tile_id, metrics, points, None
    except Exception as exc:
        return tile_id, None, None, f"{type(exc).__name__}: {exc}"


def _evaluate_task(task):
    """(tile_id, gt_path, pred_path, h, prune) -> (tile_id, cm, gt_tm, pred_tm, error)."""
    tile_id, gt_path, pred_path, h, prune = task
    try:
        gt = read_labels(Path(gt_path))
        pred = read_labels(Path(pred_path))
        cm = confusion(gt, pred)
        gt_tm = summarize_measures(_sidewalk_measures(gt, h, prune, tile_id), tile_id)
        pred_tm = summarize_measures(_sidewalk_measures(pred, h, prune, tile_id), tile_id)
        return tile_id, cm, gt_tm, pred_tm, None
    except Exception as exc:
        return tile_id, None, None, None, f"{type(exc).__name__}: {exc}"


def _render_task(task):
    """(tile_id, path, out_path) -> (tile_id, error)."""
    tile_id, path, out_path = task
    try:
        labels = read_labels(Path(path))
        tile = TileRaster(labels=labels, geotransform=_NO_GEO, tile_id=tile_id)
        save_overlay(tile, Path(out_path))
        return tile_id, None
    except Exception as exc:
        return tile_id, f"{type(exc).__name__}: {exc}"


_RASTERIZE_STATE: tuple | None = None


def _init_rasterize(layers, dims, out_dir) -> None:
    global _RASTERIZE_STATE
    _RASTERIZE_STATE = (layers, dims, out_dir)


def _rasterize_task(extent):
    layers, dims, out_dir = _RASTERIZE_STATE
    try:
        if extent.tile_id not in dims:
            raise ValueError("manifest entry lacks width/height")
        height, width = dims[extent.tile_id]
        tile = rasterize(layers, extent, width, height)
        save_tile(tile, out_dir / f"{extent.tile_id}.png", out_dir / f"{extent.tile_id}.json")
        return extent.tile_id, None
    except Exception as exc:
        return extent.tile_id, f"{type(exc).__name__}: {exc}"


def _map_extents(layers, dims, out_dir, extents, workers: int) -> list:
    if workers <= 1 or len(extents) <= 1:
        _init_rasterize(layers, dims, out_dir)
        return [_rasterize_task(e) for e in extents]
    chunk = max(1, len(extents) // (workers * 4))
    with multiprocessing.Pool(processes=workers, initializer=_init_rasterize,
                              initargs=(layers, dims, out_dir)) as pool:
        return pool.map(_rasterize_task, extents, chunksize=chunk)


def _finish(errors: list[tuple[str, str]], out_dir: Path) -> int:
    """Exit status 0 iff no tile failed; failures go to stderr and errors.json."""
    if not errors:
        return 0
    errors = sorted(errors)
    for tile_id, message in errors:
        print(f"tile {tile_id}: {message}", file=sys.stderr)
    payload = {"errors": [{"message": m, "tile_id": t} for t, m in errors]}
    (out_dir / "errors.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 1


def _stamp(cfg: RunConfig) -> None:
    if cfg.stamp:
        payload = {"generated": datetime.now(timezone.utc).isoformat()}
        (cfg.out_dir / "run.json").write_text(json.dumps(payload, indent=2) + "\n")


# ---------------------------------------------------------------------------
# subcommands

def cmd_rasterize(cfg: RunConfig) -> int:
    extents_path = _require(cfg, "extents_path", "--extents")
    if not cfg.vectors:
        raise CliError("this command needs --vectors")
    layers = []
    for vp in cfg.vectors:
        vp = Path(vp)
        if not vp.exists():
            raise CliError(f"--vectors path does not exist: {vp}")
        layers.append(load_vector_layer(vp, class_property=cfg.class_property))
    extents = load_extents(extents_path)
    dims = manifest_dimensions(extents_path)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    results = _map_extents(layers, dims, cfg.out_dir, extents, cfg.workers)
    errors = [(tid, msg) for tid, msg in results if msg is not None]
    logger.info("rasterized %d/%d tiles", len(results) - len(errors), len(results))
    _stamp(cfg)
    return _finish(errors, cfg.out_dir)


def cmd_analyze(cfg: RunConfig) -> int:
    pred_dir = _require(cfg, "pred_dir", "--pred")
    tiles = _discover_tiles(pred_dir)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [(tid, str(p), cfg.h, cfg.prune, cfg.points) for tid, p in tiles]
    results = _map_tiles(_analyze_task, tasks, cfg.workers)
    errors = []
    metrics: list[TileMetrics] = []
    point_rows: list[tuple] = []
    for tile_id, tm, points, err in results:
        if err is not None:
            errors.append((tile_id, err))
            continue
        if not tm.defined:
            logger.warning("tile %s: no sidewalk skeleton points; skipped", tile_id)
            continue
        metrics.append(tm)
        if points is not None:
            point_rows.extend((tile_id, r, c, w, a, k) for r, c, w, a, k in points)
    ext = cfg.fmt
    reports.tile_metrics_report(metrics, cfg.out_dir / f"tile_metrics.{ext}", cfg.fmt)
    if cfg.points:
        reports.points_report(point_rows, cfg.out_dir / f"points.{ext}", cfg.fmt)
    _stamp(cfg)
    return _finish(errors, cfg.out_dir)


def _mean_scores(per_tile: list[ClassScores]) -> ClassScores:
    """Unweighted average of per-tile scores; a class averages over tiles where it scored."""
    iou: dict[int, float] = {}
    precision: dict[int, float] = {}
    recall: dict[int, float] = {}
    for target, name in ((iou, "iou"), (precision, "precision"), (recall, "recall")):
        pooled: dict[int, list[float]] = {}
        for s in per_tile:
            for cid, v in getattr(s, name).items():
                pooled.setdefault(cid, []).append(v)
        for cid, vals in pooled.items():
            target[cid] = math.fsum(vals) / len(vals)
    mious = [s.miou for s in per_tile if math.isfinite(s.miou)]
    miou = math.fsum(mious) / len(mious) if mious else float("nan")
    return ClassScores(iou=iou, precision=precision, recall=recall, miou=miou)


def cmd_evaluate(cfg: RunConfig) -> int:
    gt_dir = _require(cfg, "gt_dir", "--gt")
    pred_dir = _require(cfg, "pred_dir", "--pred")
    gt_tiles = _discover_tiles(gt_dir)
    pred_map = dict(_discover_tiles(pred_dir))
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    errors: list[tuple[str, str]] = []
    tasks = []
    for tile_id, gt_path in gt_tiles:
        pred_path = pred_map.get(tile_id)
        if pred_path is None:
            errors.append((tile_id, "missing prediction tile"))
            continue
        tasks.append((tile_id, str(gt_path), str(pred_path), cfg.h, cfg.prune))
    results = _map_tiles(_evaluate_task, tasks, cfg.workers)

    total = ConfusionMatrix()
    per_tile_scores: list[ClassScores] = []
    pairs: dict[str, list[tuple[float, float]]] = {f: [] for f in REPORT_FEATURES}
    for tile_id, cm, gt_tm, pred_tm, err in results:
        if err is not None:
            errors.append((tile_id, err))
            continue
        if cfg.score_mode == "per-tile":
            per_tile_scores.append(scores(cm))
        else:
            total = total.accumulate(cm)
        pairs["width"].append((gt_tm.mean_width, pred_tm.mean_width))
        pairs["angle"].append((gt_tm.mean_angle, pred_tm.mean_angle))
        pairs["curvature"].append((gt_tm.mean_curvature, pred_tm.mean_curvature))

    cls = _mean_scores(per_tile_scores) if cfg.score_mode == "per-tile" else scores(total)
    rmse_rows = []
    for feature in REPORT_FEATURES:
        rows, dropped = binned_rmse(pairs[feature], cfg.bins[feature])
        if dropped:
            logger.info("%s: dropped %d pair(s) with undefined values", feature, dropped)
        rmse_rows.extend(rows)
    ext = cfg.fmt
    reports.scores_report(cls, cfg.out_dir / f"scores.{ext}", cfg.fmt)
    reports.rmse_report(rmse_rows, cfg.out_dir / f"rmse.{ext}", cfg.fmt)
    if cfg.figures:
        reports.scores_figure(cls, cfg.out_dir / "scores.png")
        reports.rmse_figure(rmse_rows, cfg.out_dir / "rmse.png")
    _stamp(cfg)
    return _finish(errors, cfg.out_dir)


def cmd_aggregate(cfg: RunConfig) -> int:
    pred_dir = _require(cfg, "pred_dir", "--pred")
    extents_path = _require(cfg, "extents_path", "--extents")
    landuse_path = _require(cfg, "landuse_path", "--landuse")
    extents = load_extents(extents_path)
    lu = load_landuse_layer(landuse_path, category_property=cfg.category_property)
    assignment = landuse_join(extents, lu, rule=cfg.join_rule)
    tiles = _discover_tiles(pred_dir)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [(tid, str(p), cfg.h, cfg.prune, False) for tid, p in tiles]
    results = _map_tiles(_analyze_task, tasks, cfg.workers)
    errors = [(tid, err) for tid, _, _, err in results if err is not None]
    metrics = [tm for _, tm, _, err in results if err is None]
    aggregates = aggregate_by_landuse(metrics, assignment)
    ext = cfg.fmt
    reports.landuse_report(aggregates, cfg.out_dir / f"landuse.{ext}", cfg.fmt)
    if cfg.figures:
        reports.landuse_figure(aggregates, cfg.out_dir / "landuse.png")
    _stamp(cfg)
    return _finish(errors, cfg.out_dir)


def cmd_render(cfg: RunConfig) -> int:
    pred_dir = _require(cfg, "pred_dir", "--pred")
    tiles = _discover_tiles(pred_dir)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [(tid, str(p), str(cfg.out_dir / f"{tid}.png")) for tid, p in tiles]
    results = _map_tiles(_render_task, tasks, cfg.workers)
    errors = [(tid, msg) for tid, msg in results if msg is not None]
    _stamp(cfg)
    return _finish(errors, cfg.out_dir)


def cmd_synth(cfg: RunConfig) -> int:
    if cfg.count < 1:
        raise CliError("this command needs --count of at least 1")
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    tile_ids = emit_fixtures(cfg.out_dir, cfg.count, (cfg.size, cfg.size), seed=cfg.seed)
    logger.info("wrote %d synthetic tiles to %s", len(tile_ids), cfg.out_dir)
    _stamp(cfg)
    return 0


# ---------------------------------------------------------------------------
# argument parsing and config merge

def _load_config_file(path: Path) -> dict:
    if not path.exists():
        raise CliError(f"config file does not exist: {path}")
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError as exc:
            raise CliError("TOML config needs Python 3.11+; use a JSON config") from exc
        try:
            return tomllib.loads(path.read_text())
        except tomllib.TOMLDecodeError as exc:
            raise CliError(f"bad TOML config {path}: {exc}") from exc
    try:
        loaded = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise CliError(f"bad JSON config {path}: {exc}") from exc
    if not isinstance(loaded, dict):
        raise CliError(f"config {path} must hold an object at top level")
    return loaded


def _bins_from_config(raw) -> dict[str, BinSpec]:
    bins = {f: default_bin_spec(f) for f in REPORT_FEATURES}
    if raw is None:
        return bins
    if not isinstance(raw, dict):
        raise CliError("config key 'bins' must map feature -> edge list")
    for feature, edges in raw.items():
        if feature not in REPORT_FEATURES:
            raise CliError(f"unknown bin feature {feature!r}")
        try:
            parsed = tuple(float(e) for e in edges)
        except (TypeError, ValueError) as exc:
            raise CliError(f"bad bin edges for {feature}: {edges!r}") from exc
        try:
            bins[feature] = BinSpec(feature=feature, edges=parsed)
        except ValueError as exc:
            raise CliError(str(exc)) from exc
    return bins


def _merge(args: argparse.Namespace, cfg_file: dict, key: str, default):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in cfg_file:
        return cfg_file[key]
    return default


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg_file: dict = {}
    if getattr(args, "config", None):
        cfg_file = _load_config_file(Path(args.config))

    def get(key, default):
        return _merge(args, cfg_file, key, default)

    def get_path(key):
        v = get(key, None)
        return Path(v) if v is not None else None

    vectors = get("vectors", ())
    if getattr(args, "no_figures", None):
        figures = False
    else:
        figures = bool(cfg_file.get("figures", True))
    return RunConfig(
        gt_dir=get_path("gt"),
        pred_dir=get_path("pred"),
        vectors=tuple(Path(v) for v in vectors),
        extents_path=get_path("extents"),
        landuse_path=get_path("landuse"),
        out_dir=Path(get("out", "out")),
        h=int(get("h", DEFAULT_H)),
        prune=int(get("prune", 3)),
        workers=int(get("workers", 1)),
        fmt=str(get("format", "csv")),
        bins=_bins_from_config(cfg_file.get("bins")),
        class_property=str(get("class_property", "class")),
        category_property=str(get("category_property", "category")),
        join_rule=str(get("join_rule", "majority")),
        score_mode=str(get("score_mode", "accumulate")),
        figures=figures,
        points=bool(get("points", False)),
        stamp=bool(get("stamp", False)),
        count=int(get("count", 0)),
        size=int(get("size", 512)),
        seed=int(get("seed", 0)),
    )


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON (or TOML on 3.11+) config file; flags win")
    common.add_argument("--workers", type=int, help="worker processes (default 1)")
    common.add_argument("--h", type=int, help="half-window in skeleton steps (default 5)")
    common.add_argument("--out", help="output directory (default ./out)")
    common.add_argument("--format", choices=("csv", "json"), help="report format (default csv)")
    common.add_argument("--prune", type=int, help="spur-prune length in pixels (default 3)")
    common.add_argument("--stamp", action="store_true", default=None,
                        help="also write run.json with a generation timestamp")

    parser = argparse.ArgumentParser(
        prog="walkscope",
        description="Sidewalk morphometrics over class-labeled raster tiles.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rasterize", parents=[common],
                       help="burn vector layers into label tiles over a tile-extent manifest")
    p.add_argument("--extents", help="tile extent manifest (JSON)")
    p.add_argument("--vectors", nargs="+", help="vector layer files (GeoJSON-style)")
    p.add_argument("--class-property", dest="class_property",
                   help="feature property naming the class (default 'class')")
    p.set_defaults(func=cmd_rasterize)

    p = sub.add_parser("analyze", parents=[common],
                       help="per-tile sidewalk width/angle/curvature means")
    p.add_argument("--pred", help="directory of label tiles to analyze")
    p.add_argument("--points", action="store_true", default=None,
                   help="also dump per-point measurements")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("evaluate", parents=[common],
                       help="segmentation scores and binned RMSE for paired gt/pred corpora")
    p.add_argument("--gt", help="directory of ground-truth label tiles")
    p.add_argument("--pred", help="directory of predicted label tiles")
    p.add_argument("--score-mode", dest="score_mode", choices=("accumulate", "per-tile"),
                   help="accumulate counts across tiles (default) or average per-tile scores")
    p.add_argument("--no-figures", dest="no_figures", action="store_true", default=None,
                   help="skip PNG figures next to the reports")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("aggregate", parents=[common],
                       help="join tiles to land-use categories and report category means")
    p.add_argument("--pred", help="directory of label tiles to analyze")
    p.add_argument("--extents", help="tile extent manifest (JSON)")
    p.add_argument("--landuse", help="land-use polygon layer (GeoJSON-style)")
    p.add_argument("--category-property", dest="category_property",
                   help="feature property naming the category (default 'category')")
    p.add_argument("--join-rule", dest="join_rule", choices=("majority", "centroid"),
                   help="tile-to-category rule (default majority area)")
    p.add_argument("--no-figures", dest="no_figures", action="store_true", default=None,
                   help="skip PNG figures next to the reports")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("render", parents=[common],
                       help="color overlays: sidewalk red, building blue, road gray")
    p.add_argument("--pred", help="directory of label tiles to render")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("synth", parents=[common],
                       help="emit a deterministic synthetic fixture corpus")
    p.add_argument("--count", type=int, help="number of tiles")
    p.add_argument("--size", type=int, help="square tile edge in pixels (default 512)")
    p.add_argument("--seed", type=int, help="corpus seed (default 0)")
    p.set_defaults(func=cmd_synth)
    return parser


def _setup_logging() -> None:
    level_name = os.environ.get("WALKSCOPE_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr, force=True,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return args.func(cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RasterError, CrsMismatchError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
