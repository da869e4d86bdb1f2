"""Report emitters shaped like the three standard tables, as CSV or JSON, plus figures."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from pathlib import Path

from .aggregate import LandUseAggregate
from .evaluation import BinnedRmseRow, ClassScores
from .raster_io import BACKGROUND, BUILDING, ROAD, SIDEWALK

logger = logging.getLogger(__name__)

# report row order for class scores
SCORE_ROW_ORDER = ((BUILDING, "Building"), (ROAD, "Road"),
                   (SIDEWALK, "Sidewalk"), (BACKGROUND, "Background"))

FEATURE_LABELS = {
    "width": "Width (pixels)",
    "angle": "Angle (degrees)",
    "curvature": "Curvature (1/pixels)",
}


def _fmt(value: float | None, digits: int = 4) -> str:
    if value is None or (isinstance(value, float) and not math.isfinite(value)):
        return ""
    return f"{value:.{digits}f}"


def _edge(value: float) -> str:
    if math.isinf(value):
        return "inf"
    return f"{value:g}"


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue())


def scores_report(scores: ClassScores, out: Path, fmt: str = "csv") -> Path:
    """Class,IoU,Precision,Recall rows in the standard order, then a final mIoU row."""
    rows = []
    for cid, name in SCORE_ROW_ORDER:
        rows.append([
            name,
            _fmt(scores.iou.get(cid)),
            _fmt(scores.precision.get(cid)),
            _fmt(scores.recall.get(cid)),
        ])
    rows.append(["mIoU", _fmt(scores.miou), "", ""])
    if fmt == "json":
        payload = [dict(zip(("Class", "IoU", "Precision", "Recall"), r)) for r in rows]
        out.write_text(json.dumps(payload, indent=2) + "\n")
    else:
        _write_csv(out, ["Class", "IoU", "Precision", "Recall"], rows)
    return out


def rmse_report(rows_by_feature: list[BinnedRmseRow], out: Path, fmt: str = "csv") -> Path:
    """Feature,Bin,N,RMSE rows; bins rendered lo-hi with inf for the open end."""
    rows = []
    for r in rows_by_feature:
        rows.append([
            FEATURE_LABELS.get(r.feature, r.feature),
            f"{_edge(r.lo)}-{_edge(r.hi)}",
            str(r.n),
            _fmt(r.rmse),
        ])
    if fmt == "json":
        payload = [dict(zip(("Feature", "Bin", "N", "RMSE"), r)) for r in rows]
        out.write_text(json.dumps(payload, indent=2) + "\n")
    else:
        _write_csv(out, ["Feature", "Bin", "N", "RMSE"], rows)
    return out


def landuse_report(aggregates: list[LandUseAggregate], out: Path, fmt: str = "csv") -> Path:
    """Land use,# Img.,Width,Angle,Curv. rows sorted by category."""
    rows = []
    for a in aggregates:
        rows.append([
            a.category,
            str(a.n_tiles),
            _fmt(a.mean_width),
            _fmt(a.mean_angle),
            _fmt(a.mean_curvature),
        ])
    if fmt == "json":
        payload = [dict(zip(("Land use", "# Img.", "Width", "Angle", "Curv."), r)) for r in rows]
        out.write_text(json.dumps(payload, indent=2) + "\n")
    else:
        _write_csv(out, ["Land use", "# Img.", "Width", "Angle", "Curv."], rows)
    return out


def tile_metrics_report(metrics: list, out: Path, fmt: str = "csv") -> Path:
    """Per-tile means: tile_id,n_points,mean_width,mean_angle,mean_curvature,defined."""
    rows = []
    for m in metrics:
        rows.append([
            m.tile_id,
            str(m.n_points),
            _fmt(m.mean_width),
            _fmt(m.mean_angle),
            _fmt(m.mean_curvature),
            "true" if m.defined else "false",
        ])
    header = ["tile_id", "n_points", "mean_width", "mean_angle", "mean_curvature", "defined"]
    if fmt == "json":
        payload = [dict(zip(header, r)) for r in rows]
        out.write_text(json.dumps(payload, indent=2) + "\n")
    else:
        _write_csv(out, header, rows)
    return out


def points_report(rows: list[tuple], out: Path, fmt: str = "csv") -> Path:
    """Per-point dump: tile_id,row,col,width,angle,curvature (blank when undefined)."""
    header = ["tile_id", "row", "col", "width", "angle", "curvature"]
    text_rows = [
        [tile_id, str(r), str(c), _fmt(w), _fmt(a), _fmt(k)]
        for tile_id, r, c, w, a, k in rows
    ]
    if fmt == "json":
        payload = [dict(zip(header, tr)) for tr in text_rows]
        out.write_text(json.dumps(payload, indent=2) + "\n")
    else:
        _write_csv(out, header, text_rows)
    return out


def _savefig(fig, out: Path) -> None:
    # fixed dpi and stripped metadata keep PNG output byte-stable across runs
    fig.savefig(out, dpi=100, metadata={"Software": None})


def scores_figure(scores: ClassScores, out: Path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    names = [name for _, name in SCORE_ROW_ORDER]
    ious = [scores.iou.get(cid, float("nan")) for cid, _ in SCORE_ROW_ORDER]
    precisions = [scores.precision.get(cid, float("nan")) for cid, _ in SCORE_ROW_ORDER]
    recalls = [scores.recall.get(cid, float("nan")) for cid, _ in SCORE_ROW_ORDER]
    x = range(len(names))
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.26
    ax.bar([i - width for i in x], ious, width, label="IoU")
    ax.bar(list(x), precisions, width, label="Precision")
    ax.bar([i + width for i in x], recalls, width, label="Recall")
    ax.set_xticks(list(x), names)
    ax.set_ylim(0, 1)
    ax.set_ylabel("score")
    ax.set_title(f"Segmentation scores (mIoU = {scores.miou:.4f})")
    ax.legend()
    fig.tight_layout()
    _savefig(fig, out)
    plt.close(fig)
    return out


def rmse_figure(rows: list[BinnedRmseRow], out: Path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    features = []
    for r in rows:
        if r.feature not in features:
            features.append(r.feature)
    fig, axes = plt.subplots(1, max(len(features), 1), figsize=(4 * max(len(features), 1), 3.5))
    if len(features) <= 1:
        axes = [axes]
    for ax, feature in zip(axes, features):
        sub = [r for r in rows if r.feature == feature]
        labels = [f"{_edge(r.lo)}-{_edge(r.hi)}" for r in sub]
        values = [r.rmse if r.rmse is not None else 0.0 for r in sub]
        ax.bar(labels, values)
        ax.set_title(FEATURE_LABELS.get(feature, feature))
        ax.set_ylabel("RMSE")
        ax.tick_params(axis="x", rotation=30)
    fig.tight_layout()
    _savefig(fig, out)
    plt.close(fig)
    return out


def landuse_figure(aggregates: list[LandUseAggregate], out: Path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    cats = [a.category for a in aggregates]
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
    for ax, (label, values) in zip(axes, (
        ("Width (pixels)", [a.mean_width for a in aggregates]),
        ("Angle (degrees)", [a.mean_angle for a in aggregates]),
        ("Curv. (1/pixels)", [a.mean_curvature for a in aggregates]),
    )):
        ax.bar(cats, values)
        ax.set_title(label)
        ax.tick_params(axis="x", rotation=30)
    fig.tight_layout()
    _savefig(fig, out)
    plt.close(fig)
    return out
