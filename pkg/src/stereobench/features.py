"""Hand-crafted feature extraction.

Stands in for a learned backbone: census bit planes or an intensity/gradient
descriptor, optionally after input normalization, at full, half or quarter
resolution.  All descriptors are pure functions of the image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import FeatureMap, Image

# ITU-R 601 luma weights, frozen so census codes never depend on a config.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

# Default normalization constants (ImageNet); override per config.
IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)


@dataclass
class FeatureConfig:
    kind: str = "census"  # census | intensity_gradient
    window: int = 5  # census window side, odd and >= 3
    channels: int = 16  # intensity_gradient channel count, even
    scale: int = 4  # feature-map downsampling divisor: 1, 2 or 4
    normalize_input: bool = False
    mean: tuple[float, ...] = IMAGENET_MEAN
    std: tuple[float, ...] = IMAGENET_STD

    def __post_init__(self) -> None:
        if self.kind not in ("census", "intensity_gradient"):
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if self.kind == "census" and (self.window % 2 == 0 or self.window < 3):
            raise ValueError(f"census window must be odd and >= 3, got {self.window}")
        if self.kind == "intensity_gradient" and not (
            2 <= self.channels <= 64 and self.channels % 2 == 0
        ):
            raise ValueError(f"channels must be even in [2, 64], got {self.channels}")
        if self.scale not in (1, 2, 4):
            raise ValueError(f"scale must be 1, 2 or 4, got {self.scale}")


def luma(img: Image) -> np.ndarray:
    """H x W luminance plane (ITU-R 601 weights for RGB, identity for gray)."""
    if img.channels == 1:
        return img.data[:, :, 0]
    w = np.asarray(LUMA_WEIGHTS, dtype=np.float32)
    return img.data @ w


def normalize(img: Image, mean, std) -> Image:
    """Per-channel (x/255 - mean) / std, the usual input normalization."""
    mean = np.asarray(mean, dtype=np.float32).reshape(-1)
    std = np.asarray(std, dtype=np.float32).reshape(-1)
    if len(mean) != img.channels or len(std) != img.channels:
        raise ValueError(
            f"mean/std length ({len(mean)}/{len(std)}) must match channels ({img.channels})"
        )
    if np.any(std <= 0):
        raise ValueError("std must be positive")
    out = (img.data / np.float32(255.0) - mean) / std
    return Image(out, value_range="normalized")


def downsample(img: Image, s: int) -> Image:
    """s x s area averaging; output dims are ceil(dim / s).

    Partial edge blocks average only the pixels they actually contain.
    """
    if s not in (1, 2, 4):
        raise ValueError(f"downsample factor must be 1, 2 or 4, got {s}")
    if s == 1:
        return Image(img.data.copy(), value_range=img.value_range)
    h, w = img.height, img.width
    ys = np.arange(0, h, s)
    xs = np.arange(0, w, s)
    sums = np.add.reduceat(np.add.reduceat(img.data.astype(np.float64), ys, axis=0), xs, axis=1)
    block_h = np.minimum(ys + s, h) - ys
    block_w = np.minimum(xs + s, w) - xs
    area = (block_h[:, None] * block_w[None, :]).astype(np.float64)
    return Image((sums / area[:, :, None]).astype(np.float32), value_range=img.value_range)


def census(img: Image, window: int) -> FeatureMap:
    """Census descriptor as one 0/1 channel per non-center window position.

    Bit b (window raster order, center skipped) is 1 where that neighbor is
    strictly darker than the center; ties give 0.  Borders replicate edges.
    A w x w window yields w*w - 1 channels, which keeps every cost-volume
    construction (difference = scaled Hamming distance, group-wise products)
    meaningful on census features.  Use :func:`census_codes` for the compact
    packed-word form.
    """
    if window % 2 == 0 or window < 3:
        raise ValueError(f"census window must be odd and >= 3, got {window}")
    gray = np.ascontiguousarray(luma(img), dtype=np.float32)
    planes = kernels.census_bits(gray, window // 2)
    return FeatureMap(planes, scale=1)


def census_codes(img: Image, window: int) -> np.ndarray:
    """Packed census codes: (ceil(B/32), H, W) uint32, bit b at word b//32, bit b%32."""
    planes = census(img, window).data
    bits = planes.astype(np.uint64)
    n_bits = bits.shape[0]
    n_words = (n_bits + 31) // 32
    words = np.zeros((n_words, planes.shape[1], planes.shape[2]), dtype=np.uint64)
    for b in range(n_bits):
        words[b // 32] |= bits[b] << np.uint64(b % 32)
    return words.astype(np.uint32)


def _standardize(channel: np.ndarray) -> np.ndarray:
    mean = channel.mean(dtype=np.float64)
    std = channel.std(dtype=np.float64)
    if std < 1e-12:
        return np.zeros_like(channel, dtype=np.float32)
    return ((channel - mean) / std).astype(np.float32)


def intensity_gradient(img: Image, n_channels: int) -> FeatureMap:
    """Luma + gradient magnitudes + oriented directional derivatives.

    Channel order is [luma, |dx|, |dy|, oriented bins...] truncated or padded
    to ``n_channels``; every channel is standardized to zero mean and unit
    variance over the image (constant channels become zero).
    """
    if not (2 <= n_channels <= 64 and n_channels % 2 == 0):
        raise ValueError(f"channels must be even in [2, 64], got {n_channels}")
    gray = luma(img).astype(np.float64)
    gy, gx = np.gradient(gray)
    raw = [gray, np.abs(gx), np.abs(gy)]
    n_bins = max(n_channels - 3, 0)
    for k in range(n_bins):
        theta = np.pi * k / n_bins
        raw.append(np.abs(np.cos(theta) * gx + np.sin(theta) * gy))
    planes = np.stack([_standardize(c) for c in raw[:n_channels]], axis=0)
    return FeatureMap(planes, scale=1)


def extract(img: Image, cfg: FeatureConfig) -> FeatureMap:
    """normalize (optional) -> downsample to cfg.scale -> descriptor."""
    work = img
    if cfg.normalize_input:
        mean, std = cfg.mean, cfg.std
        if work.channels == 1:
            mean, std = mean[:1], std[:1]
        work = normalize(work, mean, std)
    work = downsample(work, cfg.scale)
    if cfg.kind == "census":
        fm = census(work, cfg.window)
    else:
        fm = intensity_gradient(work, cfg.channels)
    fm.scale = cfg.scale
    return fm
