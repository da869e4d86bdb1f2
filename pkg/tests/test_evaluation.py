import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from walkscope.evaluation import (DEFAULT_BIN_EDGES, BinnedRmseRow, BinSpec,
                                  ConfusionMatrix, binned_rmse, confusion,
                                  default_bin_spec, scores)
from walkscope.raster_io import (BACKGROUND, BUILDING, ROAD, SIDEWALK,
                                 DimensionMismatchError)


def brute_confusion(gt, pred):
    counts = np.zeros((4, 4), dtype=np.int64)
    for r in range(gt.shape[0]):
        for c in range(gt.shape[1]):
            counts[gt[r, c], pred[r, c]] += 1
    return counts


class TestConfusion:
    @pytest.mark.parametrize("seed", range(20))
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        gt = rng.integers(0, 4, (16, 16)).astype(np.uint8)
        pred = rng.integers(0, 4, (16, 16)).astype(np.uint8)
        cm = confusion(gt, pred)
        assert np.array_equal(cm.counts, brute_confusion(gt, pred))

    def test_total_is_pixel_count(self):
        gt = np.zeros((8, 8), dtype=np.uint8)
        assert confusion(gt, gt).total == 64

    def test_shape_mismatch_rejected(self):
        with pytest.raises(DimensionMismatchError):
            confusion(np.zeros((4, 4), dtype=np.uint8),
                      np.zeros((4, 5), dtype=np.uint8))

    def test_out_of_range_label_rejected(self):
        bad = np.full((2, 2), 4, dtype=np.uint8)
        good = np.zeros((2, 2), dtype=np.uint8)
        with pytest.raises(ValueError, match="pred"):
            confusion(good, bad)
        with pytest.raises(ValueError, match="gt"):
            confusion(bad, good)

    def test_accumulate_adds(self):
        gt = np.array([[SIDEWALK, ROAD]], dtype=np.uint8)
        pred = np.array([[SIDEWALK, BACKGROUND]], dtype=np.uint8)
        a = confusion(gt, pred)
        b = confusion(gt, gt)
        total = ConfusionMatrix().accumulate(a).accumulate(b)
        assert total.counts[SIDEWALK, SIDEWALK] == 2
        assert total.counts[ROAD, BACKGROUND] == 1
        assert total.counts[ROAD, ROAD] == 1
        assert total.total == 4


class TestScores:
    def test_hand_counted_example(self):
        # 2 sidewalk pixels hit, 1 missed to road, 1 road pixel called sidewalk
        gt = np.array([[SIDEWALK, SIDEWALK, SIDEWALK, ROAD]], dtype=np.uint8)
        pred = np.array([[SIDEWALK, SIDEWALK, ROAD, SIDEWALK]], dtype=np.uint8)
        s = scores(confusion(gt, pred))
        assert s.iou[SIDEWALK] == pytest.approx(2 / 4)
        assert s.precision[SIDEWALK] == pytest.approx(2 / 3)
        assert s.recall[SIDEWALK] == pytest.approx(2 / 3)
        assert s.iou[ROAD] == pytest.approx(0.0)
        assert s.miou == pytest.approx((0.5 + 0.0) / 2)

    def test_identical_grids_score_one(self):
        rng = np.random.default_rng(5)
        gt = rng.integers(0, 4, (20, 20)).astype(np.uint8)
        s = scores(confusion(gt, gt))
        for c in (BACKGROUND, BUILDING, ROAD, SIDEWALK):
            assert s.iou[c] == 1.0
            assert s.precision[c] == 1.0
            assert s.recall[c] == 1.0
        assert s.miou == 1.0

    def test_absent_class_excluded_from_miou(self):
        # building never appears in gt or pred
        gt = np.array([[SIDEWALK, ROAD, BACKGROUND]], dtype=np.uint8)
        s = scores(confusion(gt, gt))
        assert BUILDING not in s.iou
        assert s.miou == 1.0

    def test_class_absent_from_gt_but_predicted_counts(self):
        gt = np.array([[BACKGROUND, BACKGROUND]], dtype=np.uint8)
        pred = np.array([[BACKGROUND, SIDEWALK]], dtype=np.uint8)
        s = scores(confusion(gt, pred))
        # all predictions wrong for sidewalk: IoU 0, precision 0, recall undefined
        assert s.iou[SIDEWALK] == 0.0
        assert s.precision[SIDEWALK] == 0.0
        assert SIDEWALK not in s.recall

    def test_precision_recall_imply_iou(self):
        # 1/IoU = 1/P + 1/R - 1 whenever tp > 0
        rng = np.random.default_rng(11)
        gt = rng.integers(0, 4, (32, 32)).astype(np.uint8)
        pred = np.where(rng.random((32, 32)) < 0.3,
                        rng.integers(0, 4, (32, 32)), gt).astype(np.uint8)
        s = scores(confusion(gt, pred))
        for c in s.iou:
            p = s.precision.get(c)
            r = s.recall.get(c)
            if p and r:
                assert 1 / s.iou[c] == pytest.approx(1 / p + 1 / r - 1)

    def test_published_operating_point(self):
        # precision 0.91 and recall 0.86 for the sidewalk class put its IoU
        # near 0.79; build counts that hit those rates exactly
        tp = 91 * 86
        fp = 9 * 86  # precision = tp/(tp+fp) = 91/100
        fn = 14 * 91  # recall = tp/(tp+fn) = 86/100
        counts = np.zeros((4, 4), dtype=np.int64)
        counts[SIDEWALK, SIDEWALK] = tp
        counts[SIDEWALK, BACKGROUND] = fn
        counts[BACKGROUND, SIDEWALK] = fp
        counts[BACKGROUND, BACKGROUND] = 10_000
        s = scores(ConfusionMatrix(counts=counts))
        assert s.precision[SIDEWALK] == pytest.approx(0.91)
        assert s.recall[SIDEWALK] == pytest.approx(0.86)
        assert s.iou[SIDEWALK] == pytest.approx(1 / (1 / 0.91 + 1 / 0.86 - 1))
        assert s.iou[SIDEWALK] == pytest.approx(0.79, abs=0.005)

    def test_empty_grids_give_nan_miou(self):
        s = scores(ConfusionMatrix())
        assert s.iou == {}
        assert math.isnan(s.miou)


class TestBinnedRmse:
    def test_hand_example(self):
        rows, dropped = binned_rmse([(10.0, 11.0), (12.0, 14.0)],
                                    BinSpec("width", (7.0, 14.0)))
        assert dropped == 0
        (row,) = rows
        assert row.n == 2
        # mean squared error (1 + 4)/2
        assert row.rmse == pytest.approx(math.sqrt(2.5), abs=1e-4)
        assert row.rmse == pytest.approx(1.58114, abs=1e-4)

    def test_half_open_edges(self):
        spec = BinSpec("width", (0.0, 7.0, 14.0, math.inf))
        rows, _ = binned_rmse([(7.0, 7.0), (14.0, 14.0), (6.999, 7.0)], spec)
        assert [r.n for r in rows] == [1, 1, 1]
        assert rows[1].lo == 7.0 and rows[1].hi == 14.0

    def test_binned_on_gt_value(self):
        spec = BinSpec("width", (0.0, 10.0, math.inf))
        rows, _ = binned_rmse([(5.0, 50.0)], spec)
        assert rows[0].n == 1 and rows[1].n == 0

    def test_non_finite_pairs_dropped(self):
        spec = BinSpec("width", (0.0, math.inf))
        rows, dropped = binned_rmse(
            [(float("nan"), 1.0), (1.0, float("nan")), (math.inf, 1.0), (1.0, 1.0)],
            spec)
        assert dropped == 3
        assert rows[0].n == 1
        assert rows[0].rmse == 0.0

    def test_out_of_range_gt_dropped(self):
        spec = BinSpec("angle", (0.0, 180.0))
        rows, dropped = binned_rmse([(-1.0, 0.0), (180.0, 0.0), (90.0, 90.0)], spec)
        assert dropped == 2
        assert rows[0].n == 1

    def test_empty_bin_has_none_rmse(self):
        spec = BinSpec("width", (0.0, 1.0, 2.0))
        rows, _ = binned_rmse([(0.5, 0.5)], spec)
        assert rows[1].n == 0 and rows[1].rmse is None

    def test_row_type(self):
        rows, _ = binned_rmse([], BinSpec("width", (0.0, 1.0)))
        assert rows == [BinnedRmseRow(feature="width", lo=0.0, hi=1.0, n=0, rmse=None)]

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.floats(-100, 400, allow_nan=False),
                              st.floats(-100, 400, allow_nan=False)),
                    max_size=40))
    def test_property_pair_conservation(self, pairs):
        spec = BinSpec("width", (0.0, 7.0, 14.0, 200.0))
        rows, dropped = binned_rmse(pairs, spec)
        assert sum(r.n for r in rows) + dropped == len(pairs)
        for row in rows:
            if row.n:
                # rmse bounded by the largest pointwise error
                worst = max(abs(p - g) for g, p in pairs
                            if row.lo <= g < row.hi and math.isfinite(g))
                assert row.rmse <= worst + 1e-9


class TestBinSpecs:
    def test_default_edges(self):
        assert DEFAULT_BIN_EDGES["width"] == (0.0, 7.0, 14.0, math.inf)
        assert DEFAULT_BIN_EDGES["angle"] == (0.0, 45.0, 90.0, 135.0, 180.0)
        assert DEFAULT_BIN_EDGES["curvature"] == (0.0, 0.1, 0.2, 0.3, math.inf)

    def test_default_spec_carries_feature(self):
        spec = default_bin_spec("angle")
        assert spec.feature == "angle"
        assert spec.edges == DEFAULT_BIN_EDGES["angle"]

    def test_too_few_edges_rejected(self):
        with pytest.raises(ValueError):
            BinSpec("width", (1.0,))

    def test_non_ascending_rejected(self):
        with pytest.raises(ValueError):
            BinSpec("width", (0.0, 5.0, 5.0))
        with pytest.raises(ValueError):
            BinSpec("width", (5.0, 0.0))
