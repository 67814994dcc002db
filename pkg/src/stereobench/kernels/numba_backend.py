"""Numba @njit versions of the hot kernels.

Same contracts as ``numpy_backend``; kept in explicit-loop form for the JIT.
All kernels are nogil so sample-level thread pools get real parallelism.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _relax_into(prev, p1, p2, scratch):
    # scratch receives min(prev[d], prev[d-1]+P1, prev[d+1]+P1, min+P2) - min.
    disparities = prev.shape[0]
    m = prev[0]
    for d in range(1, disparities):
        if prev[d] < m:
            m = prev[d]
    cap = m + p2
    for d in range(disparities):
        best = prev[d]
        if d > 0 and prev[d - 1] + p1 < best:
            best = prev[d - 1] + p1
        if d + 1 < disparities and prev[d + 1] + p1 < best:
            best = prev[d + 1] + p1
        if cap < best:
            best = cap
        v = best - m
        # (m + p2) - m can overshoot p2 by an ulp; the exact bound is p2
        scratch[d] = p2 if v > p2 else v
    return m


@njit(cache=True, nogil=True)
def sgm_sweep(cost, dy, dx, p1, p2, out):
    height, width, disparities = cost.shape
    scratch = np.empty(disparities, dtype=np.float64)
    if dy == 0:
        x0, x1, step = (0, width, 1) if dx > 0 else (width - 1, -1, -1)
        lane = np.empty(disparities, dtype=np.float64)
        for y in range(height):
            for i, x in enumerate(range(x0, x1, step)):
                if i == 0:
                    for d in range(disparities):
                        lane[d] = cost[y, x, d]
                else:
                    _relax_into(lane, p1, p2, scratch)
                    for d in range(disparities):
                        lane[d] = cost[y, x, d] + scratch[d]
                for d in range(disparities):
                    out[y, x, d] += lane[d]
    else:
        y0, y1, step = (0, height, 1) if dy > 0 else (height - 1, -1, -1)
        prev_row = np.empty((width, disparities), dtype=np.float64)
        cur_row = np.empty((width, disparities), dtype=np.float64)
        first = True
        for y in range(y0, y1, step):
            for x in range(width):
                px = x - dx
                if first or px < 0 or px >= width:
                    for d in range(disparities):
                        cur_row[x, d] = cost[y, x, d]
                else:
                    _relax_into(prev_row[px], p1, p2, scratch)
                    for d in range(disparities):
                        cur_row[x, d] = cost[y, x, d] + scratch[d]
            for x in range(width):
                for d in range(disparities):
                    out[y, x, d] += cur_row[x, d]
            prev_row, cur_row = cur_row, prev_row
            first = False


@njit(cache=True, nogil=True)
def census_bits(gray, radius):
    height, width = gray.shape
    side = 2 * radius + 1
    planes = np.empty((side * side - 1, height, width), dtype=np.float32)
    for y in range(height):
        for x in range(width):
            center = gray[y, x]
            b = 0
            for off_y in range(-radius, radius + 1):
                for off_x in range(-radius, radius + 1):
                    if off_y == 0 and off_x == 0:
                        continue
                    yy = min(max(y + off_y, 0), height - 1)
                    xx = min(max(x + off_x, 0), width - 1)
                    planes[b, y, x] = 1.0 if gray[yy, xx] < center else 0.0
                    b += 1
    return planes


@njit(cache=True, nogil=True)
def median_filter_masked(values, valid, radius):
    height, width = values.shape
    out = values.copy()
    out_valid = np.empty((height, width), dtype=np.bool_)
    if radius == 0:
        for y in range(height):
            for x in range(width):
                out_valid[y, x] = valid[y, x]
        return out, out_valid
    side = 2 * radius + 1
    buf = np.empty(side * side, dtype=np.float64)
    for y in range(height):
        for x in range(width):
            n = 0
            for yy in range(max(y - radius, 0), min(y + radius + 1, height)):
                for xx in range(max(x - radius, 0), min(x + radius + 1, width)):
                    if valid[yy, xx]:
                        # insertion sort keeps buf[:n] ascending
                        v = np.float64(values[yy, xx])
                        j = n
                        while j > 0 and buf[j - 1] > v:
                            buf[j] = buf[j - 1]
                            j -= 1
                        buf[j] = v
                        n += 1
            if n > 0:
                out[y, x] = np.float32(buf[(n - 1) // 2])
                out_valid[y, x] = True
            else:
                out_valid[y, x] = False
    return out, out_valid
