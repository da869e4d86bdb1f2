"""Segmentation scores (IoU, precision, recall, mIoU) and binned RMSE validation."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .raster_io import CLASS_IDS, DimensionMismatchError

logger = logging.getLogger(__name__)

N_CLASSES = len(CLASS_IDS)

DEFAULT_BIN_EDGES = {
    "width": (0.0, 7.0, 14.0, math.inf),
    "angle": (0.0, 45.0, 90.0, 135.0, 180.0),
    "curvature": (0.0, 0.1, 0.2, 0.3, math.inf),
}


@dataclass
class ConfusionMatrix:
    counts: np.ndarray = field(
        default_factory=lambda: np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    )

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def accumulate(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        self.counts += other.counts
        return self


@dataclass(frozen=True)
class ClassScores:
    iou: dict[int, float]  # per class id; absent classes omitted
    precision: dict[int, float]
    recall: dict[int, float]
    miou: float


@dataclass(frozen=True)
class BinSpec:
    feature: str
    edges: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.edges) < 2:
            raise ValueError("need at least two bin edges")
        if any(a >= b for a, b in zip(self.edges, self.edges[1:])):
            raise ValueError(f"edges must be strictly ascending: {self.edges}")


@dataclass(frozen=True)
class BinnedRmseRow:
    feature: str
    lo: float
    hi: float
    n: int
    rmse: float | None


def default_bin_spec(feature: str) -> BinSpec:
    return BinSpec(feature=feature, edges=DEFAULT_BIN_EDGES[feature])


def confusion(gt: np.ndarray, pred: np.ndarray) -> ConfusionMatrix:
    """Per-pixel 4x4 tally; counts[g][p] = pixels with truth g predicted p."""
    if gt.shape != pred.shape:
        raise DimensionMismatchError(f"gt {gt.shape} vs pred {pred.shape}")
    for name, grid in (("gt", gt), ("pred", pred)):
        if grid.size and int(grid.max()) >= N_CLASSES:
            raise ValueError(f"{name} grid holds label {int(grid.max())}, outside 0..{N_CLASSES - 1}")
    idx = gt.astype(np.int64).ravel() * N_CLASSES + pred.astype(np.int64).ravel()
    counts = np.bincount(idx, minlength=N_CLASSES * N_CLASSES)
    return ConfusionMatrix(counts=counts.reshape(N_CLASSES, N_CLASSES))


def scores(cm: ConfusionMatrix) -> ClassScores:
    """IoU, precision, and recall per class; classes absent from gt and pred are skipped."""
    iou: dict[int, float] = {}
    precision: dict[int, float] = {}
    recall: dict[int, float] = {}
    for c in CLASS_IDS:
        tp = int(cm.counts[c, c])
        fn = int(cm.counts[c, :].sum()) - tp
        fp = int(cm.counts[:, c].sum()) - tp
        if tp + fp + fn == 0:
            continue  # class absent everywhere: undefined, excluded from miou
        iou[c] = tp / (tp + fp + fn)
        if tp + fp > 0:
            precision[c] = tp / (tp + fp)
        if tp + fn > 0:
            recall[c] = tp / (tp + fn)
    miou = math.fsum(iou.values()) / len(iou) if iou else float("nan")
    return ClassScores(iou=iou, precision=precision, recall=recall, miou=miou)


def binned_rmse(pairs: list[tuple[float, float]], spec: BinSpec) -> tuple[list[BinnedRmseRow], int]:
    """RMSE of pred vs gt per half-open [lo, hi) bin, keyed on the gt value.

    Pairs with a non-finite side are dropped; returns (rows, dropped count).
    """
    edges = spec.edges
    sq_sums = [0.0] * (len(edges) - 1)
    ns = [0] * (len(edges) - 1)
    dropped = 0
    for gt_v, pred_v in pairs:
        if not (math.isfinite(gt_v) and math.isfinite(pred_v)):
            dropped += 1
            continue
        b = None
        for k in range(len(edges) - 1):
            if edges[k] <= gt_v < edges[k + 1]:
                b = k
                break
        if b is None:
            dropped += 1
            continue
        sq_sums[b] += (pred_v - gt_v) ** 2
        ns[b] += 1
    rows = []
    for k in range(len(edges) - 1):
        rmse = math.sqrt(sq_sums[k] / ns[k]) if ns[k] > 0 else None
        rows.append(BinnedRmseRow(feature=spec.feature, lo=edges[k], hi=edges[k + 1],
                                  n=ns[k], rmse=rmse))
    return rows, dropped
