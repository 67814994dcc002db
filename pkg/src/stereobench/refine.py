"""Post-regression refinement: left-right consistency invalidation,
median smoothing over valid neighbors, and background-favoring hole fill."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import DisparityMap


@dataclass
class RefineConfig:
    lr_check: bool = True
    lr_threshold: float = 1.0  # pixels
    median_radius: int = 1
    fill: str = "none"  # none | nearest_valid_row

    def __post_init__(self) -> None:
        if self.lr_threshold <= 0:
            raise ValueError("lr_threshold must be > 0")
        if self.median_radius < 0:
            raise ValueError("median_radius must be >= 0")
        if self.fill not in ("none", "nearest_valid_row"):
            raise ValueError(f"unknown fill mode {self.fill!r}")


def lr_check(d_left: DisparityMap, d_right: DisparityMap, threshold: float = 1.0) -> DisparityMap:
    """Invalidate left pixels whose right-view counterpart disagrees.

    A pixel fails when |d_L(y, x) - d_R(y, round(x - d_L(y, x)))| exceeds the
    threshold, or when that lookup lands off-image or on an invalid right
    pixel.  Values are never modified, only the mask.
    """
    if d_left.values.shape != d_right.values.shape:
        raise ValueError("left/right disparity shapes differ")
    height, width = d_left.values.shape
    xs = np.arange(width)[None, :]
    lookup = np.rint(xs - d_left.values).astype(np.int64)
    in_bounds = (lookup >= 0) & (lookup < width)
    safe = np.clip(lookup, 0, width - 1)
    rows = np.arange(height)[:, None]
    d_r = d_right.values[rows, safe]
    r_valid = d_right.valid[rows, safe]
    consistent = np.abs(d_left.values - d_r) <= threshold
    valid = d_left.valid & in_bounds & r_valid & consistent
    return DisparityMap(d_left.values.copy(), valid)


def median_filter(d: DisparityMap, radius: int) -> DisparityMap:
    """Lower median over valid window entries; see kernels for semantics."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    values, valid = kernels.median_filter_masked(
        np.ascontiguousarray(d.values), np.ascontiguousarray(d.valid), radius
    )
    return DisparityMap(values, valid)


def fill_holes(d: DisparityMap) -> DisparityMap:
    """Fill invalid pixels with min(nearest valid left, nearest valid right)
    along each row; occlusions belong to the background, and the background
    has the smaller disparity.  Rows with no valid pixel stay invalid."""
    height, width = d.values.shape
    values = d.values.astype(np.float64)
    valid = d.valid
    xs = np.broadcast_to(np.arange(width)[None, :], (height, width))

    left_idx = np.where(valid, xs, -1)
    left_idx = np.maximum.accumulate(left_idx, axis=1)
    right_idx = np.where(valid, xs, width)
    right_idx = np.minimum.accumulate(right_idx[:, ::-1], axis=1)[:, ::-1]

    rows = np.arange(height)[:, None]
    left_val = np.where(left_idx >= 0, values[rows, np.clip(left_idx, 0, None)], np.inf)
    right_val = np.where(right_idx < width, values[rows, np.clip(right_idx, None, width - 1)], np.inf)
    fill = np.minimum(left_val, right_val)

    fillable = ~valid & np.isfinite(fill)
    out_values = np.where(fillable, fill, values).astype(np.float32)
    return DisparityMap(out_values, valid | fillable)


def refine(d_left: DisparityMap, d_right: DisparityMap | None, cfg: RefineConfig) -> DisparityMap:
    """lr_check (when enabled and a right map is supplied) -> median -> fill."""
    out = d_left
    if cfg.lr_check:
        if d_right is None:
            raise ValueError("lr_check enabled but no right-view disparity given")
        out = lr_check(out, d_right, cfg.lr_threshold)
    if cfg.median_radius > 0:
        out = median_filter(out, cfg.median_radius)
    if cfg.fill == "nearest_valid_row":
        out = fill_holes(out)
    return out
