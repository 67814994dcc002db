"""Random-dot stereogram generation with exact ground truth.

The generator paints the left texture into the right view back-to-front, so
nearer (larger-disparity) surfaces overwrite farther ones.  Left pixels
whose target got overwritten are genuinely occluded: their texture does not
exist in the right image.  Right columns nobody painted (disocclusions)
receive fresh noise.  This yields dense left ground truth, a right-view
ground truth where defined, and an exact non-occlusion mask.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DisparityMap, Image


@dataclass
class SyntheticPair:
    left: Image
    right: Image
    disp_left: DisparityMap  # dense, valid everywhere
    disp_right: DisparityMap  # valid where some left pixel is visible
    noc_mask: np.ndarray  # left pixels whose true match survives in the right view


def _texture(rng: np.random.Generator, height: int, width: int,
             channels: int, kind: str) -> np.ndarray:
    tex = rng.uniform(0.0, 255.0, size=(height, width, channels)).astype(np.float32)
    if kind == "smooth":
        # separable 5-tap box blur, then restretch to [0, 255]
        kernel = np.ones(5) / 5.0
        work = tex.astype(np.float64)
        for axis in (0, 1):
            work = np.apply_along_axis(
                lambda m: np.convolve(np.pad(m, 2, mode="edge"), kernel, mode="valid"),
                axis, work)
        lo, hi = work.min(), work.max()
        tex = (255.0 * (work - lo) / max(hi - lo, 1e-9)).astype(np.float32)
    elif kind != "dots":
        raise ValueError(f"unknown texture kind {kind!r}")
    return tex


def make_disparity_field(
    rng: np.random.Generator, height: int, width: int,
    max_disparity: int, n_boxes: int = 6,
) -> np.ndarray:
    """Piecewise-constant integer disparities: background plane + boxes."""
    background = int(rng.integers(0, max(max_disparity // 8, 1) + 1))
    field = np.full((height, width), background, dtype=np.int64)
    for _ in range(n_boxes):
        bh = int(rng.integers(height // 8, height // 2))
        bw = int(rng.integers(width // 8, width // 2))
        y0 = int(rng.integers(0, height - bh + 1))
        x0 = int(rng.integers(0, width - bw + 1))
        d = int(rng.integers(background + 1, max_disparity + 1))
        field[y0 : y0 + bh, x0 : x0 + bw] = np.maximum(field[y0 : y0 + bh, x0 : x0 + bw], d)
    return field


def make_stereogram(
    rng: np.random.Generator,
    height: int = 256,
    width: int = 256,
    max_disparity: int = 32,
    n_boxes: int = 6,
    channels: int = 1,
    texture: str = "dots",
) -> SyntheticPair:
    """Random-dot pair with a planted piecewise-constant disparity field."""
    disp = make_disparity_field(rng, height, width, max_disparity, n_boxes)
    left = _texture(rng, height, width, channels, texture)
    right = _texture(rng, height, width, channels, texture)  # disocclusion noise

    xs = np.arange(width)
    disp_right = np.full((height, width), np.nan, dtype=np.float32)
    source_x = np.full((height, width), -1, dtype=np.int64)
    # paint far-to-near so nearer surfaces win contested right columns
    for d in np.unique(disp):
        sel = disp == int(d)
        targets = xs[None, :] - int(d)
        ok = sel & (targets >= 0)
        ys, xl = np.nonzero(ok)
        xr = xl - int(d)
        right[ys, xr] = left[ys, xl]
        disp_right[ys, xr] = float(d)
        source_x[ys, xr] = xl

    targets = xs[None, :] - disp
    in_frame = targets >= 0
    safe = np.clip(targets, 0, width - 1)
    rows = np.arange(height)[:, None]
    visible = in_frame & (source_x[rows, safe] == xs[None, :])

    return SyntheticPair(
        left=Image(left),
        right=Image(right),
        disp_left=DisparityMap(disp.astype(np.float32)),
        disp_right=DisparityMap(np.nan_to_num(disp_right), ~np.isnan(disp_right)),
        noc_mask=visible,
    )


def constant_shift_pair(
    rng: np.random.Generator,
    height: int,
    width: int,
    d: int,
    channels: int = 1,
    texture: str = "dots",
) -> SyntheticPair:
    """Fronto-parallel pair: right is the left shifted by a constant d."""
    if not 0 <= d < width:
        raise ValueError(f"shift {d} must lie in [0, {width})")
    left = _texture(rng, height, width, channels, texture)
    right = _texture(rng, height, width, channels, texture)
    if d == 0:
        right = left.copy()
    else:
        right[:, :-d] = left[:, d:]
    disp = np.full((height, width), float(d), dtype=np.float32)
    noc = np.broadcast_to(np.arange(width) >= d, (height, width)).copy()
    return SyntheticPair(
        left=Image(left),
        right=Image(right),
        disp_left=DisparityMap(disp.copy()),
        disp_right=DisparityMap(disp.copy(), noc[:, ::-1].copy()),
        noc_mask=noc,
    )
