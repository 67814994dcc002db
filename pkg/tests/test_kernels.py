"""Differential tests between the numba and numpy kernel backends, plus the
hand-derived SGM recurrence cases both must satisfy."""

import numpy as np
import pytest

from stereobench.kernels import numba_backend, numpy_backend
from stereobench.aggregation import path_directions

BACKENDS = [numpy_backend, numba_backend]
ALL_DIRECTIONS = path_directions(8)


class TestBackendsAgree:
    def test_sgm_sweep_bitwise_equal(self, rng):
        cost = rng.uniform(0, 10, (14, 19, 7)).astype(np.float64)
        for dy, dx in ALL_DIRECTIONS:
            out_nb = np.zeros_like(cost)
            out_np = np.zeros_like(cost)
            numba_backend.sgm_sweep(cost, dy, dx, 1.0, 4.0, out_nb)
            numpy_backend.sgm_sweep(cost, dy, dx, 1.0, 4.0, out_np)
            assert np.array_equal(out_nb, out_np), f"direction {(dy, dx)}"

    def test_census_bits_equal(self, rng):
        gray = rng.uniform(0, 255, (21, 17)).astype(np.float32)
        for radius in (1, 2, 3):
            a = numba_backend.census_bits(gray, radius)
            b = numpy_backend.census_bits(gray, radius)
            assert np.array_equal(a, b)

    def test_median_filter_equal(self, rng):
        values = rng.uniform(0, 50, (15, 18)).astype(np.float32)
        valid = rng.uniform(size=values.shape) > 0.35
        for radius in (0, 1, 2):
            va, ma = numba_backend.median_filter_masked(values, valid, radius)
            vb, mb = numpy_backend.median_filter_masked(values, valid, radius)
            assert np.array_equal(va, vb)
            assert np.array_equal(ma, mb)


@pytest.mark.parametrize("backend", BACKENDS, ids=["numpy", "numba"])
class TestSgmSweep:
    def test_hand_recurrence_1x2(self, backend):
        # 1x2 image, D=2, single left-to-right path, P1=1, P2=2:
        #   pixel 0: L = C = [3, 1]
        #   pixel 1, d=0: 4 + min(3, 1+1, 1+2) - 1 = 5
        #            d=1: 2 + min(1, 3+1, 1+2) - 1 = 2
        cost = np.array([[[3.0, 1.0], [4.0, 2.0]]], dtype=np.float64)
        out = np.zeros_like(cost)
        backend.sgm_sweep(cost, 0, 1, 1.0, 2.0, out)
        assert np.array_equal(out, np.array([[[3.0, 1.0], [5.0, 2.0]]]))

    def test_zero_penalties_identity(self, backend, rng):
        cost = rng.uniform(0, 5, (9, 11, 6)).astype(np.float64)
        for dy, dx in ALL_DIRECTIONS:
            out = np.zeros_like(cost)
            backend.sgm_sweep(cost, dy, dx, 0.0, 0.0, out)
            assert np.array_equal(out, cost), f"direction {(dy, dx)}"

    def test_uplift_bounds_exact(self, backend, rng):
        # L >= C and L <= C + P2 hold without tolerance: the relax step is
        # clamped at P2 and float rounding is monotone
        cost = rng.uniform(0, 20, (12, 13, 8)).astype(np.float64)
        p2 = 4.0
        for dy, dx in ALL_DIRECTIONS:
            out = np.zeros_like(cost)
            backend.sgm_sweep(cost, dy, dx, 1.0, p2, out)
            assert np.all(out >= cost)
            assert np.all(out <= cost + p2)

    def test_single_pixel_image(self, backend):
        cost = np.array([[[2.0, 7.0, 1.0]]], dtype=np.float64)
        out = np.zeros_like(cost)
        backend.sgm_sweep(cost, 0, 1, 1.0, 4.0, out)
        assert np.array_equal(out, cost)  # no predecessor anywhere

    def test_single_disparity(self, backend, rng):
        cost = rng.uniform(0, 5, (6, 7, 1)).astype(np.float64)
        out = np.zeros_like(cost)
        backend.sgm_sweep(cost, 0, 1, 1.0, 4.0, out)
        assert np.array_equal(out, cost)

    def test_brute_force_recurrence(self, backend, rng):
        # independent per-pixel oracle evaluating the published recurrence
        cost = rng.uniform(0, 9, (5, 6, 4)).astype(np.float64)
        p1, p2 = 0.7, 2.5
        for dy, dx in [(0, 1), (1, 0), (1, -1), (-1, -1)]:
            out = np.zeros_like(cost)
            backend.sgm_sweep(cost, dy, dx, p1, p2, out)
            expect = _sweep_oracle(cost, dy, dx, p1, p2)
            assert np.allclose(out, expect, rtol=0, atol=0)


def _sweep_oracle(cost, dy, dx, p1, p2):
    height, width, max_d = cost.shape
    out = np.full_like(cost, np.nan)
    ys = range(height) if dy >= 0 else range(height - 1, -1, -1)
    xs = range(width) if dx >= 0 else range(width - 1, -1, -1)
    for y in ys:
        for x in xs:
            py, px = y - dy, x - dx
            if not (0 <= py < height and 0 <= px < width):
                out[y, x] = cost[y, x]
                continue
            prev = out[py, px]
            m = prev.min()
            for d in range(max_d):
                cands = [prev[d], m + p2]
                if d > 0:
                    cands.append(prev[d - 1] + p1)
                if d < max_d - 1:
                    cands.append(prev[d + 1] + p1)
                out[y, x, d] = cost[y, x, d] + min(min(cands) - m, p2)
    return out


@pytest.mark.parametrize("backend", BACKENDS, ids=["numpy", "numba"])
class TestCensusBits:
    def test_constant_image_all_zero(self, backend):
        gray = np.full((6, 7), 9.0, dtype=np.float32)
        assert np.count_nonzero(backend.census_bits(gray, 2)) == 0

    def test_hand_3x3(self, backend):
        # neighbors [1..4, 6..9] around center 5: the first four (raster
        # order) are darker, the last four are brighter
        gray = np.arange(1, 10, dtype=np.float32).reshape(3, 3)
        planes = backend.census_bits(gray, 1)
        assert planes.shape == (8, 3, 3)
        assert planes[:, 1, 1].tolist() == [1, 1, 1, 1, 0, 0, 0, 0]

    def test_ties_give_zero(self, backend):
        gray = np.array([[5.0, 5.0], [5.0, 4.0]], dtype=np.float32)
        planes = backend.census_bits(gray, 1)
        # at (0,0) only the (1,1) neighbor (value 4) is darker
        assert planes[:, 0, 0].sum() == planes[7, 0, 0] == 1.0


@pytest.mark.parametrize("backend", BACKENDS, ids=["numpy", "numba"])
class TestMedianMasked:
    def test_radius_zero_identity(self, backend, rng):
        values = rng.uniform(0, 9, (5, 5)).astype(np.float32)
        valid = rng.uniform(size=values.shape) > 0.5
        out, mask = backend.median_filter_masked(values, valid, 0)
        assert np.array_equal(out, values)
        assert np.array_equal(mask, valid)

    def test_hand_window(self, backend):
        values = np.array([[1, 2, 3], [4, 100, 6], [7, 8, 9]], dtype=np.float32)
        valid = np.ones_like(values, dtype=bool)
        out, mask = backend.median_filter_masked(values, valid, 1)
        # center window is all nine values; lower median of sorted list is 6
        assert out[1, 1] == 6.0
        assert mask.all()

    def test_no_valid_neighbors_stays_invalid(self, backend):
        values = np.zeros((3, 3), dtype=np.float32)
        valid = np.zeros((3, 3), dtype=bool)
        out, mask = backend.median_filter_masked(values, valid, 1)
        assert not mask.any()
        assert np.array_equal(out, values)  # values untouched

    def test_values_from_input_multiset(self, backend, rng):
        values = rng.uniform(0, 100, (9, 9)).astype(np.float32)
        valid = rng.uniform(size=values.shape) > 0.4
        out, mask = backend.median_filter_masked(values, valid, 2)
        pool = set(values[valid].tolist())
        assert all(v in pool for v in out[mask].tolist())
