"""KITTI devkit disparity codec: 16-bit grayscale PNG, value = disparity * 256.

A stored zero marks an invalid pixel, so encodable disparities live in
[1/256, 65535/256].  Decoding an encoded map is accurate to 1/512 px.
"""

from __future__ import annotations

import cv2
import numpy as np

from .core import DisparityMap


class PngCodecError(ValueError):
    """PNG bytes that are not a valid KITTI disparity image."""


def read_kitti_disparity_png(data: bytes) -> DisparityMap:
    """Decode 16-bit single-channel PNG bytes into a DisparityMap."""
    raw = cv2.imdecode(np.frombuffer(data, dtype=np.uint8), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise PngCodecError("bytes are not a decodable PNG")
    if raw.dtype != np.uint16:
        raise PngCodecError(f"KITTI disparity PNG must be 16-bit, got {raw.dtype}")
    if raw.ndim != 2:
        raise PngCodecError(f"KITTI disparity PNG must be single-channel, got shape {raw.shape}")
    values = raw.astype(np.float32) / 256.0
    valid = raw != 0
    return DisparityMap(values, valid)


def write_kitti_disparity_png(disparity: DisparityMap) -> bytes:
    """Encode a DisparityMap as KITTI 16-bit PNG bytes.

    Valid values are rounded to the nearest 1/256 and clamped to
    [1, 65535]; invalid pixels store 0.
    """
    values = disparity.values
    valid = disparity.valid
    if np.any(values[valid] < 0):
        raise ValueError("negative disparities cannot be KITTI-encoded")
    stored = np.round(values.astype(np.float64) * 256.0)
    stored = np.clip(stored, 1, 65535).astype(np.uint16)
    stored[~valid] = 0
    ok, buf = cv2.imencode(".png", stored)
    if not ok:
        raise PngCodecError("PNG encoding failed")
    return buf.tobytes()
