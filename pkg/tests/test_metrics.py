import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stereobench.core import DisparityMap
from stereobench.metrics import (MetricSpec, ReportRow, aggregate, bad_tau,
                                 d1_official, default_metric_spec, epe,
                                 evaluate_sample, metric_names)


def _pair(errors):
    gt = DisparityMap(np.full((1, len(errors)), 10.0, dtype=np.float32))
    est = DisparityMap((10.0 + np.asarray(errors, dtype=np.float32))[None])
    return est, gt


class TestEpe:
    def test_identical_maps(self, rng):
        d = DisparityMap(rng.uniform(0, 9, (4, 5)).astype(np.float32))
        assert epe(d, d) == 0.0

    def test_hand_mean(self):
        est, gt = _pair([0, 1, 2, 7])
        assert epe(est, gt) == 2.5

    def test_all_invalid_raises(self):
        gt = DisparityMap(np.zeros((2, 2), dtype=np.float32), np.zeros((2, 2), dtype=bool))
        est = DisparityMap(np.zeros((2, 2), dtype=np.float32))
        with pytest.raises(ValueError, match="valid"):
            epe(est, gt)

    def test_negative_disparity_map_rejected(self):
        est = DisparityMap(np.zeros((2, 2), dtype=np.float32), negative_disparity=True)
        gt = DisparityMap(np.zeros((2, 2), dtype=np.float32))
        with pytest.raises(ValueError, match="negative"):
            epe(est, gt)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            epe(DisparityMap(np.zeros((2, 2), dtype=np.float32)),
                DisparityMap(np.zeros((2, 3), dtype=np.float32)))


class TestBadTau:
    def test_hand_counts(self):
        est, gt = _pair([0, 1, 2, 7])
        assert bad_tau(est, gt, 3.0) == 25.0
        # strict inequality: the error of exactly 1 is not bad at tau=1
        assert bad_tau(est, gt, 1.0) == 50.0

    def test_identical_maps(self, rng):
        d = DisparityMap(rng.uniform(0, 9, (4, 5)).astype(np.float32))
        assert bad_tau(d, d, 0.5) == 0.0

    def test_all_errors_exactly_tau(self):
        est, gt = _pair([2, 2, 2, 2])
        assert bad_tau(est, gt, 2.0) == 0.0

    def test_monotone_in_tau(self, rng):
        gt = DisparityMap(rng.uniform(0, 30, (8, 9)).astype(np.float32))
        est = DisparityMap((gt.values + rng.normal(0, 2, gt.values.shape)).astype(np.float32))
        values = [bad_tau(est, gt, t) for t in (0.5, 1.0, 2.0, 4.0, 8.0, 1e9)]
        assert all(a >= b for a, b in zip(values, values[1:]))
        assert values[-1] == 0.0

    def test_bad_threshold_rejected(self):
        est, gt = _pair([1])
        with pytest.raises(ValueError):
            bad_tau(est, gt, 0.0)


def test_d1_official_diverges_from_bad3():
    # error 3.5 on a 100 px disparity: bad under the paper's definition,
    # fine under the devkit's compound >3px AND >5% rule
    gt = DisparityMap(np.array([[100.0]], dtype=np.float32))
    est = DisparityMap(np.array([[103.5]], dtype=np.float32))
    assert bad_tau(est, gt, 3.0) == 100.0
    assert d1_official(est, gt) == 0.0
    near_gt = DisparityMap(np.array([[10.0]], dtype=np.float32))
    near_est = DisparityMap(np.array([[13.5]], dtype=np.float32))
    assert d1_official(near_est, near_gt) == 100.0


class TestMaskSemantics:
    def test_joint_valid_intersection(self):
        gt = DisparityMap(np.array([[1.0, 2.0, 3.0, 4.0]], dtype=np.float32),
                          np.array([[True, True, False, True]]))
        est = DisparityMap(np.array([[1.0, 9.0, 9.0, 4.0]], dtype=np.float32),
                           np.array([[True, False, True, True]]))
        assert epe(est, gt) == 0.0  # only pixels 0 and 3 count

    def test_extra_mask(self):
        est, gt = _pair([0, 0, 5, 5])
        extra = np.array([[True, True, False, False]])
        assert epe(est, gt, extra_mask=extra) == 0.0

    def test_permutation_invariance(self, rng):
        gt_v = rng.uniform(0, 20, 60).astype(np.float32)
        est_v = rng.uniform(0, 20, 60).astype(np.float32)
        perm = rng.permutation(60)
        a = epe(DisparityMap(est_v.reshape(6, 10)), DisparityMap(gt_v.reshape(6, 10)))
        b = epe(DisparityMap(est_v[perm].reshape(6, 10)), DisparityMap(gt_v[perm].reshape(6, 10)))
        assert np.isclose(a, b, rtol=1e-12)


def _loop_metrics(est, gt, mask, tau):
    errors = []
    for y in range(gt.shape[0]):
        for x in range(gt.shape[1]):
            if mask[y, x]:
                errors.append(abs(float(est[y, x]) - float(gt[y, x])))
    bad = sum(1 for e in errors if e > tau)
    return sum(errors) / len(errors), 100.0 * bad / len(errors)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_vectorized_equals_scalar_loop(seed):
    rng = np.random.default_rng(seed)
    gt_v = rng.uniform(0, 40, (5, 7)).astype(np.float32)
    est_v = rng.uniform(0, 40, (5, 7)).astype(np.float32)
    mask = rng.uniform(size=(5, 7)) > 0.3
    if not mask.any():
        mask[0, 0] = True
    gt = DisparityMap(gt_v, mask)
    est = DisparityMap(est_v)
    loop_epe, loop_bad = _loop_metrics(est_v, gt_v, mask, 3.0)
    assert np.isclose(epe(est, gt), loop_epe, rtol=1e-6)
    assert np.isclose(bad_tau(est, gt, 3.0), loop_bad, rtol=1e-6)


class TestEvaluateSample:
    def test_dataset_conventions(self):
        assert default_metric_spec("kitti2015").bad_thresholds == (3.0,)
        assert default_metric_spec("eth3d").bad_thresholds == (1.0,)
        assert default_metric_spec("middlebury").bad_thresholds == (2.0,)
        assert default_metric_spec("sceneflow").bad_thresholds == ()
        with pytest.raises(ValueError):
            default_metric_spec("imagenet")

    def test_row_contents(self):
        est, gt = _pair([0, 1, 2, 7])
        row = evaluate_sample(est, gt, MetricSpec(bad_thresholds=(1.0, 3.0)), "s0")
        assert row.id == "s0"
        assert row.valid_pixels == 4
        assert row.epe == 2.5
        assert row.bad == {1.0: 50.0, 3.0: 25.0}

    def test_metric_names(self):
        spec = MetricSpec(bad_thresholds=(1.0, 2.5))
        assert metric_names(spec) == ["epe", "bad_1", "bad_2.5"]


class TestAggregate:
    def test_single_row(self):
        row = ReportRow("a", 10, 1.5, {3.0: 20.0})
        rep = aggregate([row])
        assert rep.pixel_weighted["epe"] == 1.5
        assert rep.sample_mean["bad_3"] == 20.0

    def test_equal_counts_match(self):
        rows = [ReportRow("a", 10, 1.0, {}), ReportRow("b", 10, 3.0, {})]
        rep = aggregate(rows)
        assert rep.pixel_weighted["epe"] == rep.sample_mean["epe"] == 2.0

    def test_weighted_mean_arithmetic(self):
        rows = [ReportRow("a", 10, 1.0, {}), ReportRow("b", 30, 3.0, {})]
        rep = aggregate(rows)
        assert rep.pixel_weighted["epe"] == 2.5
        assert rep.sample_mean["epe"] == 2.0

    def test_reproducible_from_rows(self, rng):
        rows = [ReportRow(f"s{i}", int(rng.integers(1, 100)),
                          float(rng.uniform(0, 4)), {3.0: float(rng.uniform(0, 100))})
                for i in range(7)]
        rep = aggregate(rows)
        total = sum(r.valid_pixels for r in rows)
        assert np.isclose(rep.pixel_weighted["epe"],
                          sum(r.epe * r.valid_pixels for r in rows) / total)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            aggregate([])
