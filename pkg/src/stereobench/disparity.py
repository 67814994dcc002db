"""Disparity regression from aggregated volumes.

Winner-take-all, softmax-expectation regression (matching costs become
probabilities via a temperature softmax over negated costs, the disparity
is their weighted sum), parabola subpixel refinement, and upsampling back
to the input resolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from .core import CostVolume, DisparityMap


@dataclass
class RegressionConfig:
    kind: str = "wta_parabola"  # wta | soft_argmin | wta_parabola
    temperature: float = 1.0  # soft_argmin peakedness; t -> 0 approaches wta
    upsample_to_full: bool = True

    def __post_init__(self) -> None:
        if self.kind not in ("wta", "soft_argmin", "wta_parabola"):
            raise ValueError(f"unknown regression kind {self.kind!r}")
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")


def _planes(volume: CostVolume) -> np.ndarray:
    if volume.groups != 1:
        raise ValueError("regression expects a 3D (single-group) volume")
    return volume.data[0]


def wta(volume: CostVolume) -> DisparityMap:
    """argmin over d; ties break toward the smaller disparity."""
    idx = np.argmin(_planes(volume), axis=0)
    return DisparityMap(idx.astype(np.float32))


def soft_argmin(volume: CostVolume, temperature: float = 1.0) -> DisparityMap:
    """Expectation of d under softmax(-cost / t); always lands in [0, D-1]."""
    if temperature <= 0:
        raise ValueError("temperature must be > 0")
    cost = _planes(volume).astype(np.float64)
    z = -cost / temperature
    z -= z.max(axis=0, keepdims=True)
    p = np.exp(z)
    p /= p.sum(axis=0, keepdims=True)
    d = np.arange(cost.shape[0], dtype=np.float64).reshape(-1, 1, 1)
    return DisparityMap((p * d).sum(axis=0).astype(np.float32))


def parabola_subpixel(volume: CostVolume, d_wta: DisparityMap) -> DisparityMap:
    """Fit a parabola through the WTA minimum and its two d-neighbors.

    offset = (c[d-1] - c[d+1]) / (2 * (c[d-1] - 2 c[d] + c[d+1])), clamped to
    [-0.5, 0.5]; a zero denominator gives offset 0 and boundary minima (d = 0
    or d = D-1) are returned unrefined.
    """
    cost = _planes(volume)
    max_d = cost.shape[0]
    idx = np.rint(d_wta.values).astype(np.int64)
    if idx.min() < 0 or idx.max() >= max_d:
        raise ValueError("wta indices out of volume range")
    interior = (idx > 0) & (idx < max_d - 1)
    safe = np.clip(idx, 1, max(max_d - 2, 1))
    c0 = np.take_along_axis(cost, (safe - 1)[None], axis=0)[0].astype(np.float64)
    c1 = np.take_along_axis(cost, safe[None], axis=0)[0].astype(np.float64)
    c2 = np.take_along_axis(cost, (safe + 1)[None], axis=0)[0].astype(np.float64)
    denom = 2.0 * (c0 - 2.0 * c1 + c2)
    with np.errstate(divide="ignore", invalid="ignore"):
        offset = np.where(denom != 0, (c0 - c2) / denom, 0.0)
    offset = np.clip(offset, -0.5, 0.5)
    values = np.where(interior, idx + offset, idx).astype(np.float32)
    return DisparityMap(values, d_wta.valid.copy())


def upsample_disparity(
    d: DisparityMap, s: int, target_hw: tuple[int, int] | None = None
) -> DisparityMap:
    """Bilinear upsampling by s with disparity values rescaled by s.

    Quarter-scale maps carry disparities in quarter-res pixels, so both grid
    and values grow by s.  The mask upsamples nearest-neighbor.
    """
    if s < 1:
        raise ValueError("upsample factor must be >= 1")
    if s == 1 and target_hw in (None, (d.height, d.width)):
        return DisparityMap(d.values.copy(), d.valid.copy(),
                            negative_disparity=d.negative_disparity)
    th, tw = target_hw if target_hw is not None else (d.height * s, d.width * s)
    values = cv2.resize(d.values * np.float32(s), (tw, th), interpolation=cv2.INTER_LINEAR)
    valid = cv2.resize(d.valid.astype(np.uint8), (tw, th),
                       interpolation=cv2.INTER_NEAREST).astype(bool)
    return DisparityMap(values, valid, negative_disparity=d.negative_disparity)


def regress(volume: CostVolume, cfg: RegressionConfig) -> DisparityMap:
    """Dispatch on cfg.kind."""
    if cfg.kind == "wta":
        return wta(volume)
    if cfg.kind == "soft_argmin":
        return soft_argmin(volume, cfg.temperature)
    return parabola_subpixel(volume, wta(volume))
