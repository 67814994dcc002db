"""Bit-exact PFM (portable float map) reader and writer.

PFM stores scanlines bottom-to-top; these functions flip to the package's
top-left-origin convention on read and back on write.  A negative scale on
the header line means little-endian payload; the absolute value is returned
as the scale.
"""

from __future__ import annotations

import numpy as np


class PfmError(ValueError):
    """Malformed or truncated PFM bytes."""


def _read_header_line(buf: bytes, pos: int) -> tuple[str, int]:
    end = buf.find(b"\n", pos)
    if end < 0:
        raise PfmError("truncated PFM header")
    return buf[pos:end].decode("ascii", errors="replace").strip(), end + 1


def read_pfm(data: bytes) -> tuple[np.ndarray, float]:
    """Decode PFM bytes to (H,W) or (H,W,3) float32 array plus scale.

    The returned array is top-left origin (disk order is flipped) and the
    scale is always positive.
    """
    magic, pos = _read_header_line(data, 0)
    if magic == "Pf":
        channels = 1
    elif magic == "PF":
        channels = 3
    else:
        raise PfmError(f"bad PFM magic {magic!r}")

    dims, pos = _read_header_line(data, pos)
    parts = dims.split()
    if len(parts) != 2:
        raise PfmError(f"bad PFM dims line {dims!r}")
    try:
        width, height = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise PfmError(f"bad PFM dims line {dims!r}") from exc
    if width <= 0 or height <= 0:
        raise PfmError(f"PFM dims must be positive, got {width}x{height}")

    scale_line, pos = _read_header_line(data, pos)
    try:
        scale = float(scale_line)
    except ValueError as exc:
        raise PfmError(f"bad PFM scale line {scale_line!r}") from exc
    if scale == 0.0:
        raise PfmError("PFM scale must be nonzero")
    little_endian = scale < 0

    count = width * height * channels
    payload = data[pos : pos + count * 4]
    if len(payload) != count * 4:
        raise PfmError(
            f"truncated PFM payload: expected {count * 4} bytes, got {len(payload)}"
        )
    dtype = np.dtype("<f4") if little_endian else np.dtype(">f4")
    arr = np.frombuffer(payload, dtype=dtype).astype(np.float32)
    if channels == 1:
        arr = arr.reshape(height, width)
    else:
        arr = arr.reshape(height, width, 3)
    # disk scanlines run bottom-to-top
    return np.ascontiguousarray(arr[::-1]), abs(scale)


def write_pfm(array: np.ndarray, little_endian: bool = True, scale: float = 1.0) -> bytes:
    """Encode a (H,W) or (H,W,3) float32 array as PFM bytes.

    Round trip guarantee: ``read_pfm(write_pfm(a))[0]`` equals ``a``
    bit-exactly for any finite float32 input.
    """
    arr = np.asarray(array, dtype=np.float32)
    if arr.ndim == 2:
        magic = b"Pf"
    elif arr.ndim == 3 and arr.shape[2] == 3:
        magic = b"PF"
    else:
        raise PfmError(f"PFM holds 1 or 3 channels, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise PfmError("PFM writer rejects non-finite values")
    if scale <= 0:
        raise PfmError("scale must be positive (endianness carries the sign)")

    height, width = arr.shape[:2]
    signed_scale = -scale if little_endian else scale
    header = magic + b"\n" + f"{width} {height}\n{signed_scale}\n".encode("ascii")
    dtype = np.dtype("<f4") if little_endian else np.dtype(">f4")
    payload = np.ascontiguousarray(arr[::-1]).astype(dtype).tobytes()
    return header + payload
