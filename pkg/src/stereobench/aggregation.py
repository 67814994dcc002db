"""Classical cost aggregation: group reduction, box filtering, and
semi-global matching.

SGM accumulates, along each 1D image path r, the recurrence

    L_r(p, d) = C(p, d) + min(L_r(p-r, d),
                              L_r(p-r, d-1) + P1,
                              L_r(p-r, d+1) + P1,
                              min_k L_r(p-r, k) + P2) - min_k L_r(p-r, k)

and sums the paths in a fixed order.  Accumulators are float64 throughout
(the running-minimum subtraction drifts in float32), output is float32.
The per-direction sweep lives in :mod:`stereobench.kernels`, the hot loop
of the whole package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import CostVolume
from .cost_volume import apply_max_cost


@dataclass
class SgmConfig:
    p1: float = 1.0  # penalty for |delta d| = 1 along a path
    p2: float = 4.0  # penalty for |delta d| > 1; must dominate p1
    paths: int = 8  # 4 = horizontal/vertical, 8 adds diagonals

    def __post_init__(self) -> None:
        if self.p1 < 0:
            raise ValueError("p1 must be >= 0")
        if self.p2 < self.p1:
            raise ValueError("p2 must be >= p1")
        if self.paths not in (4, 8):
            raise ValueError(f"paths must be 4 or 8, got {self.paths}")


def path_directions(paths: int) -> list[tuple[int, int]]:
    """Fixed (dy, dx) sweep order; the deterministic reduction order too."""
    dirs = [(0, 1), (0, -1), (1, 0), (-1, 0)]
    if paths == 8:
        dirs += [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    return dirs


def reduce_groups(volume: CostVolume) -> CostVolume:
    """Collapse a 4D volume's group axis into a scalar 3D cost.

    gwc groups average (negated similarities are already costs); concat
    groups turn into the per-disparity mean L1 distance between the stacked
    halves; combined volumes average their two reduced parts.  A pending
    ``max_cost`` policy is applied afterwards, since raw concat cells only
    become costs here.
    """
    kind = volume.group_kind
    if kind == "plain":
        if volume.groups != 1:
            raise ValueError("plain volume with more than one group")
        reduced = volume.data.copy()
    elif kind == "gwc":
        reduced = volume.data.mean(axis=0, dtype=np.float64).astype(np.float32)[None]
    elif kind == "concat":
        reduced = _concat_cost(volume.data)[None]
    elif kind == "combined":
        g = volume.gwc_groups
        if not 0 < g < volume.groups:
            raise ValueError(f"combined volume with bad gwc split {g}")
        gwc_part = volume.data[:g].mean(axis=0, dtype=np.float64)
        cat_part = _concat_cost(volume.data[g:]).astype(np.float64)
        reduced = ((gwc_part + cat_part) / 2.0).astype(np.float32)[None]
    else:
        raise ValueError(f"unknown group semantics {kind!r}")
    if volume.out_of_range == "max_cost":
        apply_max_cost(reduced)
    return CostVolume(reduced, group_kind="plain")


def _concat_cost(data: np.ndarray) -> np.ndarray:
    half = data.shape[0] // 2
    if data.shape[0] != 2 * half:
        raise ValueError("concat volume must have an even group count")
    diff = np.abs(data[:half].astype(np.float64) - data[half:].astype(np.float64))
    return diff.mean(axis=0).astype(np.float32)


def box_aggregate(volume: CostVolume, radius: int) -> CostVolume:
    """Per-disparity spatial mean over (2r+1)^2 windows, edge replicated."""
    if volume.groups != 1:
        raise ValueError("box_aggregate expects a 3D (single-group) volume")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0:
        return CostVolume(volume.data.copy())
    out = np.empty_like(volume.data)
    for d in range(volume.max_disparity):
        out[0, d] = _box_mean(volume.data[0, d], radius)
    return CostVolume(out)


def _box_mean(plane: np.ndarray, r: int) -> np.ndarray:
    height, width = plane.shape
    padded = np.pad(plane.astype(np.float64), r, mode="edge")
    integral = np.zeros((height + 2 * r + 1, width + 2 * r + 1), dtype=np.float64)
    integral[1:, 1:] = padded.cumsum(axis=0).cumsum(axis=1)
    k = 2 * r + 1
    sums = (
        integral[k:, k:] - integral[:-k, k:] - integral[k:, :-k] + integral[:-k, :-k]
    )
    return (sums / (k * k)).astype(np.float32)


def sgm_aggregate(volume: CostVolume, cfg: SgmConfig) -> CostVolume:
    """Sum of directional SGM sweeps; shape preserved, float32 out."""
    if volume.groups != 1:
        raise ValueError("sgm_aggregate expects a 3D (single-group) volume")
    if not np.all(np.isfinite(volume.data)):
        raise ValueError("sgm_aggregate requires finite costs")
    # (H, W, D) layout keeps the d axis contiguous for the sweeps
    cost = np.ascontiguousarray(
        volume.data[0].transpose(1, 2, 0), dtype=np.float64
    )
    out = np.zeros_like(cost)
    for dy, dx in path_directions(cfg.paths):
        kernels.sgm_sweep(cost, dy, dx, float(cfg.p1), float(cfg.p2), out)
    return CostVolume(out.transpose(2, 0, 1).astype(np.float32)[None])
