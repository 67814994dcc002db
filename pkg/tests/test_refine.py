import numpy as np
import pytest

from stereobench.core import DisparityMap
from stereobench.refine import (RefineConfig, fill_holes, lr_check, median_filter,
                                refine)


def _d(values, valid=None) -> DisparityMap:
    return DisparityMap(np.asarray(values, dtype=np.float32),
                        None if valid is None else np.asarray(valid, dtype=bool))


class TestLrCheck:
    def test_consistent_zeros_all_valid(self):
        d = _d(np.zeros((4, 6)))
        out = lr_check(d, _d(np.zeros((4, 6))), 1.0)
        assert out.valid.all()

    def test_gross_mismatch_all_invalid(self):
        left = _d(np.full((4, 8), 5.0))
        right = _d(np.zeros((4, 8)))
        out = lr_check(left, right, 1.0)
        assert not out.valid.any()

    def test_corrupted_column_exactly_invalid(self):
        h, w = 5, 12
        left = np.zeros((h, w), dtype=np.float32)
        left[:, 7] = 5.0  # lookup hits x=2 where the right map says 0
        out = lr_check(_d(left), _d(np.zeros((h, w))), 1.0)
        assert not out.valid[:, 7].any()
        keep = np.ones(w, dtype=bool)
        keep[7] = False
        assert out.valid[:, keep].all()

    def test_out_of_bounds_lookup_invalid(self):
        left = _d(np.full((2, 4), 10.0))
        right = _d(np.full((2, 4), 10.0))
        out = lr_check(left, right, 1.0)
        assert not out.valid.any()  # every lookup lands left of the image

    def test_values_never_change(self, rng):
        left = _d(rng.uniform(0, 6, (6, 9)))
        right = _d(rng.uniform(0, 6, (6, 9)))
        out = lr_check(left, right, 1.0)
        assert np.array_equal(out.values, left.values)

    def test_invalid_right_lookup_fails(self):
        left = _d(np.zeros((2, 3)))
        right = _d(np.zeros((2, 3)), valid=np.zeros((2, 3)))
        out = lr_check(left, right, 1.0)
        assert not out.valid.any()

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            lr_check(_d(np.zeros((2, 3))), _d(np.zeros((3, 2))), 1.0)


class TestMedianFilter:
    def test_radius_zero_identity(self, rng):
        d = _d(rng.uniform(0, 9, (5, 6)))
        out = median_filter(d, 0)
        assert np.array_equal(out.values, d.values)

    def test_salt_spike_removed(self):
        values = np.full((5, 5), 3.0, dtype=np.float32)
        values[2, 2] = 99.0
        out = median_filter(_d(values), 1)
        assert out.values[2, 2] == 3.0

    def test_hand_window(self):
        values = np.array([[1, 9, 2], [8, 5, 7], [3, 6, 4]], dtype=np.float32)
        out = median_filter(_d(values), 1)
        assert out.values[1, 1] == 5.0  # median of 1..9

    def test_no_valid_window_stays_invalid(self):
        values = np.zeros((3, 3), dtype=np.float32)
        out = median_filter(_d(values, np.zeros((3, 3))), 1)
        assert not out.valid.any()

    def test_sort_oracle(self, rng):
        values = rng.uniform(0, 50, (7, 8)).astype(np.float32)
        valid = rng.uniform(size=values.shape) > 0.3
        out = median_filter(_d(values, valid), 1)
        for y in range(7):
            for x in range(8):
                window = []
                for yy in range(max(y - 1, 0), min(y + 2, 7)):
                    for xx in range(max(x - 1, 0), min(x + 2, 8)):
                        if valid[yy, xx]:
                            window.append(values[yy, xx])
                if window:
                    assert out.valid[y, x]
                    assert out.values[y, x] == sorted(window)[(len(window) - 1) // 2]
                else:
                    assert not out.valid[y, x]


class TestFillHoles:
    def test_no_holes_identity(self, rng):
        d = _d(rng.uniform(0, 9, (4, 7)))
        out = fill_holes(d)
        assert np.array_equal(out.values, d.values)
        assert out.valid.all()

    def test_background_favoring_min(self):
        values = np.array([[4.0, 0.0, 0.0, 10.0]], dtype=np.float32)
        valid = np.array([[True, False, False, True]])
        out = fill_holes(_d(values, valid))
        assert out.valid.all()
        assert out.values[0, 1] == 4.0 and out.values[0, 2] == 4.0

    def test_one_sided_fill(self):
        values = np.array([[0.0, 0.0, 7.0]], dtype=np.float32)
        valid = np.array([[False, False, True]])
        out = fill_holes(_d(values, valid))
        assert np.array_equal(out.values[0], [7.0, 7.0, 7.0])

    def test_empty_row_stays_invalid(self):
        values = np.zeros((2, 4), dtype=np.float32)
        valid = np.zeros((2, 4), dtype=bool)
        valid[0, 1] = True
        out = fill_holes(_d(values, valid))
        assert out.valid[0].all()
        assert not out.valid[1].any()

    def test_idempotent(self, rng):
        values = rng.uniform(0, 9, (6, 10)).astype(np.float32)
        valid = rng.uniform(size=values.shape) > 0.4
        once = fill_holes(_d(values, valid))
        twice = fill_holes(once)
        assert np.array_equal(once.values, twice.values)
        assert np.array_equal(once.valid, twice.valid)

    def test_scan_oracle(self, rng):
        for _ in range(10):
            values = rng.uniform(0, 9, (3, 9)).astype(np.float32)
            valid = rng.uniform(size=values.shape) > 0.5
            out = fill_holes(_d(values, valid))
            for y in range(3):
                for x in range(9):
                    if valid[y, x]:
                        assert out.values[y, x] == values[y, x]
                        continue
                    lefts = [values[y, i] for i in range(x) if valid[y, i]]
                    rights = [values[y, i] for i in range(x + 1, 9) if valid[y, i]]
                    cands = ([lefts[-1]] if lefts else []) + ([rights[0]] if rights else [])
                    if cands:
                        assert out.valid[y, x]
                        assert out.values[y, x] == min(cands)
                    else:
                        assert not out.valid[y, x]


class TestRefinePipeline:
    def test_lr_requires_right_map(self):
        with pytest.raises(ValueError):
            refine(_d(np.zeros((2, 2))), None, RefineConfig(lr_check=True))

    def test_stage_order(self, rng):
        left = _d(rng.uniform(0, 3, (6, 8)))
        right = _d(rng.uniform(0, 3, (6, 8)))
        cfg = RefineConfig(lr_check=True, lr_threshold=1.0, median_radius=1,
                           fill="nearest_valid_row")
        out = refine(left, right, cfg)
        oracle = fill_holes(median_filter(lr_check(left, right, 1.0), 1))
        assert np.array_equal(out.values, oracle.values)
        assert np.array_equal(out.valid, oracle.valid)


def test_refine_config_validation():
    with pytest.raises(ValueError):
        RefineConfig(lr_threshold=0.0)
    with pytest.raises(ValueError):
        RefineConfig(median_radius=-1)
    with pytest.raises(ValueError):
        RefineConfig(fill="telepathy")
