"""Shared numeric containers and axis conventions.

Every array in the pipeline follows the same conventions:

* float32 payloads, row-major, top-left origin (codecs that store scanlines
  bottom-up perform the flip, not these containers);
* cost volumes are indexed ``(group, disparity, y, x)`` and the entry at
  ``(g, d, y, x)`` scores matching left pixel ``(y, x)`` against right pixel
  ``(y, x - d)``;
* lower cost is always better.  Similarity-style constructions negate on
  write so every consumer minimizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_MEMORY_CAP_BYTES = 8 * 1024**3


class CapacityError(RuntimeError):
    """Requested volume exceeds the configured memory cap."""


@dataclass
class Image:
    """H x W x C float32 intensity array, channels 1 (gray) or 3 (RGB).

    ``value_range`` declares what the numbers mean: ``"raw"`` for [0, 255]
    intensities straight from a codec, ``"normalized"`` after mean/std
    normalization.
    """

    data: np.ndarray
    value_range: str = "raw"

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=np.float32)
        if self.data.ndim == 2:
            self.data = self.data[:, :, None]
        if self.data.ndim != 3:
            raise ValueError(f"image data must be HxWxC, got shape {self.data.shape}")
        h, w, c = self.data.shape
        if c not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {c}")
        if h < 1 or w < 1:
            raise ValueError(f"image dims must be >= 1, got {h}x{w}")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass
class FeatureMap:
    """C x H x W float32 descriptor array at ``scale`` relative to its source image."""

    data: np.ndarray
    scale: int = 1

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=np.float32)
        if self.data.ndim != 3:
            raise ValueError(f"feature data must be CxHxW, got shape {self.data.shape}")
        if self.scale not in (1, 2, 4):
            raise ValueError(f"scale must be 1, 2 or 4, got {self.scale}")
        if self.channels < 1:
            raise ValueError("feature map needs at least one channel")

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]


# How the group axis of a 4D volume is to be reduced to a scalar cost:
#   plain    -- already a cost, G == 1
#   gwc      -- negated group-wise correlations, reduce by mean
#   concat   -- stacked [left; right] raw features, reduce by per-pair L1
#   combined -- first `gwc_groups` planes are gwc, the rest are concat
GROUP_KINDS = ("plain", "gwc", "concat", "combined")


@dataclass
class CostVolume:
    """G x D x H x W float32 matching costs, lower = better.

    ``group_kind`` records what the group axis holds so the aggregation
    stage knows how to collapse it (see :mod:`stereobench.aggregation`).
    ``out_of_range`` is the policy still owed to cells with x - d < 0 by a
    reduction step (raw concat/combined volumes only become costs there).
    """

    data: np.ndarray
    group_kind: str = "plain"
    gwc_groups: int = 0  # used by "combined" to locate the gwc/concat split
    out_of_range: str = "zero_fill"

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=np.float32)
        if self.data.ndim != 4:
            raise ValueError(f"volume data must be GxDxHxW, got shape {self.data.shape}")
        if self.group_kind not in GROUP_KINDS:
            raise ValueError(f"unknown group kind {self.group_kind!r}")

    @property
    def groups(self) -> int:
        return self.data.shape[0]

    @property
    def max_disparity(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[2]

    @property
    def width(self) -> int:
        return self.data.shape[3]


@dataclass
class DisparityMap:
    """H x W float32 disparities (pixels of its own resolution) plus validity mask.

    ``negative_disparity`` flags maps produced by a horizontal flip: such maps
    violate the d in [0, D) convention and are rejected by metric evaluation.
    """

    values: np.ndarray
    valid: np.ndarray | None = None
    negative_disparity: bool = False

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.ndim != 2:
            raise ValueError(f"disparity must be HxW, got shape {self.values.shape}")
        if self.valid is None:
            self.valid = np.ones(self.values.shape, dtype=bool)
        else:
            self.valid = np.asarray(self.valid, dtype=bool)
        if self.valid.shape != self.values.shape:
            raise ValueError(
                f"mask shape {self.valid.shape} does not match values {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values[self.valid])):
            raise ValueError("disparity values must be finite wherever valid")

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def allocate_volume(
    groups: int,
    max_disparity: int,
    height: int,
    width: int,
    group_kind: str = "plain",
    gwc_groups: int = 0,
    memory_cap_bytes: int = DEFAULT_MEMORY_CAP_BYTES,
) -> CostVolume:
    """Zero-initialized G x D x H x W volume, guarded by a memory cap.

    Raises :class:`CapacityError` when the volume would exceed the cap; a
    blown cap almost always means a misconfigured max disparity or feature
    scale, and failing fast beats thrashing swap.
    """
    for name, v in (("groups", groups), ("max_disparity", max_disparity),
                    ("height", height), ("width", width)):
        if v < 1:
            raise ValueError(f"{name} must be >= 1, got {v}")
    nbytes = 4 * groups * max_disparity * height * width
    if nbytes > memory_cap_bytes:
        raise CapacityError(
            f"volume {groups}x{max_disparity}x{height}x{width} needs {nbytes} bytes, "
            f"cap is {memory_cap_bytes}"
        )
    data = np.zeros((groups, max_disparity, height, width), dtype=np.float32)
    return CostVolume(data, group_kind=group_kind, gwc_groups=gwc_groups)


def volume_slice(volume: CostVolume, d: int) -> np.ndarray:
    """Read-only G x H x W view of all cells at disparity ``d``."""
    if not 0 <= d < volume.max_disparity:
        raise IndexError(f"disparity {d} out of range [0, {volume.max_disparity})")
    view = volume.data[:, d]
    view.flags.writeable = False
    return view
