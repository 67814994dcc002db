"""Vectorized numpy fallbacks for the hot kernels.

Must stay numerically identical to ``numba_backend``: the differential
tests assert bitwise-equal float64 output between the two.
"""

from __future__ import annotations

import numpy as np


def _relax(prev: np.ndarray, p1: float, p2: float) -> np.ndarray:
    # prev: (lanes, D) float64 accumulated costs of the path predecessor.
    # Returns min(prev[d], prev[d-1]+P1, prev[d+1]+P1, min(prev)+P2) - min(prev).
    m = prev.min(axis=-1, keepdims=True)
    up = np.empty_like(prev)
    up[..., 1:] = prev[..., :-1] + p1
    up[..., 0] = np.inf
    dn = np.empty_like(prev)
    dn[..., :-1] = prev[..., 1:] + p1
    dn[..., -1] = np.inf
    cand = np.minimum(np.minimum(prev, up), np.minimum(dn, m + p2))
    # (m + p2) - m can overshoot p2 by an ulp; the exact bound is p2
    return np.minimum(cand - m, p2)


def sgm_sweep(
    cost: np.ndarray, dy: int, dx: int, p1: float, p2: float, out: np.ndarray
) -> None:
    """Accumulate one SGM path direction into ``out``.

    ``cost`` and ``out`` are (H, W, D) float64; pixels whose predecessor
    ``(y - dy, x - dx)`` falls outside the image start a fresh path there.
    """
    height, width, _ = cost.shape
    if dy == 0 and dx == 0:
        raise ValueError("path direction cannot be (0, 0)")
    if dy == 0:
        xs = range(width) if dx > 0 else range(width - 1, -1, -1)
        lanes = None
        for x in xs:
            c = cost[:, x, :]
            lanes = c.copy() if lanes is None else c + _relax(lanes, p1, p2)
            out[:, x, :] += lanes
    else:
        ys = range(height) if dy > 0 else range(height - 1, -1, -1)
        prev_row = None
        for y in ys:
            c = cost[y]
            if prev_row is None:
                row = c.copy()
            elif dx == 0:
                row = c + _relax(prev_row, p1, p2)
            else:
                relaxed = _relax(prev_row, p1, p2)
                row = c.copy()
                if dx > 0:
                    row[dx:, :] += relaxed[:-dx, :]
                else:
                    row[:dx, :] += relaxed[-dx:, :]
            out[y] += row
            prev_row = row


def census_bits(gray: np.ndarray, radius: int) -> np.ndarray:
    """Census comparison planes for a (2r+1)^2 window.

    Returns (B, H, W) float32 with B = (2r+1)^2 - 1; plane b is 1.0 where
    the b-th neighbor (window raster order, center skipped) is strictly
    darker than the center.  Borders replicate the edge pixel.
    """
    gray = np.asarray(gray, dtype=np.float32)
    height, width = gray.shape
    side = 2 * radius + 1
    planes = np.empty((side * side - 1, height, width), dtype=np.float32)
    padded = np.pad(gray, radius, mode="edge")
    b = 0
    for off_y in range(-radius, radius + 1):
        for off_x in range(-radius, radius + 1):
            if off_y == 0 and off_x == 0:
                continue
            neighbor = padded[
                radius + off_y : radius + off_y + height,
                radius + off_x : radius + off_x + width,
            ]
            planes[b] = (neighbor < gray).astype(np.float32)
            b += 1
    return planes


def median_filter_masked(
    values: np.ndarray, valid: np.ndarray, radius: int
) -> tuple[np.ndarray, np.ndarray]:
    """Lower median over valid entries of each (2r+1)^2 window.

    Windows are cropped at image borders.  Output value at a pixel is always
    an element of the window's valid multiset (no interpolation); pixels with
    no valid window entry keep their input value and stay invalid.
    """
    if radius == 0:
        return values.copy(), valid.copy()
    height, width = values.shape
    side = 2 * radius + 1
    pv = np.pad(values.astype(np.float64), radius, constant_values=np.inf)
    pm = np.pad(valid, radius, constant_values=False)
    stack = np.empty((side * side, height, width), dtype=np.float64)
    count = np.zeros((height, width), dtype=np.int64)
    i = 0
    for off_y in range(-radius, radius + 1):
        for off_x in range(-radius, radius + 1):
            vals = pv[off_y + radius : off_y + radius + height,
                      off_x + radius : off_x + radius + width].copy()
            mask = pm[off_y + radius : off_y + radius + height,
                      off_x + radius : off_x + radius + width]
            vals[~mask] = np.inf
            stack[i] = vals
            count += mask
            i += 1
    stack.sort(axis=0)
    pick = np.maximum(count - 1, 0) // 2
    median = np.take_along_axis(stack, pick[None], axis=0)[0]
    out_valid = count > 0
    out = np.where(out_valid, median, values.astype(np.float64)).astype(np.float32)
    return out, out_valid
