"""Disparity visualization: turbo colormap over [0, range], invalid black."""

from __future__ import annotations

import cv2
import numpy as np

from .core import DisparityMap


def disparity_to_color(d: DisparityMap, max_value: float) -> np.ndarray:
    """H x W x 3 uint8 BGR rendering (cv2 channel order, ready to encode)."""
    if max_value <= 0:
        raise ValueError("colormap range must be > 0")
    scaled = np.clip(d.values / max_value, 0.0, 1.0)
    index = np.round(scaled * 255.0).astype(np.uint8)
    colored = cv2.applyColorMap(index, cv2.COLORMAP_TURBO)
    colored[~d.valid] = 0
    return colored


def visualize(d: DisparityMap, max_value: float) -> bytes:
    """Deterministic color PNG bytes for a disparity map."""
    ok, buf = cv2.imencode(".png", disparity_to_color(d, max_value))
    if not ok:
        raise RuntimeError("PNG encoding failed")
    return buf.tobytes()
