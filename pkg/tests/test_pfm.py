import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stereobench.pfm import PfmError, read_pfm, write_pfm

from conftest import random_float32_bits


def test_minimal_single_pixel():
    data = b"Pf\n1 1\n-1.0\n" + struct.pack("<f", 2.5)
    arr, scale = read_pfm(data)
    assert arr.shape == (1, 1)
    assert arr[0, 0] == np.float32(2.5)
    assert scale == 1.0


def test_zero_pixel_payload():
    blob = write_pfm(np.zeros((1, 1), dtype=np.float32))
    header_end = blob.index(b"\n", blob.index(b"\n", blob.index(b"\n") + 1) + 1) + 1
    assert blob[header_end:] == b"\x00\x00\x00\x00"


def test_truncated_payload():
    # PF header promises 3 channels but only 1 channel of bytes follows
    data = b"PF\n2 2\n-1.0\n" + b"\x00" * (2 * 2 * 4)
    with pytest.raises(PfmError, match="truncated"):
        read_pfm(data)


def test_bad_magic():
    with pytest.raises(PfmError, match="magic"):
        read_pfm(b"P5\n1 1\n-1.0\n" + b"\x00" * 4)


def test_bad_dims_line():
    with pytest.raises(PfmError):
        read_pfm(b"Pf\n1\n-1.0\n" + b"\x00" * 4)
    with pytest.raises(PfmError):
        read_pfm(b"Pf\n1 x\n-1.0\n" + b"\x00" * 4)


def test_zero_scale():
    with pytest.raises(PfmError, match="nonzero"):
        read_pfm(b"Pf\n1 1\n0.0\n" + b"\x00" * 4)


def test_nonfinite_rejected_on_write():
    with pytest.raises(PfmError):
        write_pfm(np.array([[np.nan]], dtype=np.float32))
    with pytest.raises(PfmError):
        write_pfm(np.array([[np.inf]], dtype=np.float32))


def test_scanline_flip():
    # top-left origin in memory; bottom row is stored first on disk
    arr = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=np.float32)
    blob = write_pfm(arr)
    payload = blob.rsplit(b"\n", 1)[1]
    first_stored = struct.unpack("<2f", payload[:8])
    assert first_stored == (3.0, 4.0)
    back, _ = read_pfm(blob)
    assert np.array_equal(back, arr)


def test_bytes_roundtrip(rng):
    arr = rng.standard_normal((4, 3)).astype(np.float32)
    blob = write_pfm(arr)
    decoded, scale = read_pfm(blob)
    assert np.array_equal(decoded, arr)
    assert write_pfm(decoded, little_endian=True, scale=scale) == blob


@pytest.mark.parametrize("little_endian", [True, False])
@pytest.mark.parametrize("channels", [1, 3])
def test_roundtrip_bit_patterns(rng, little_endian, channels):
    shape = (5, 7) if channels == 1 else (5, 7, 3)
    for _ in range(25):
        arr = random_float32_bits(rng, shape)
        back, scale = read_pfm(write_pfm(arr, little_endian=little_endian))
        assert np.array_equal(back.view(np.uint32), arr.view(np.uint32))
        assert scale == 1.0


@settings(max_examples=60, deadline=None)
@given(
    h=st.integers(1, 8),
    w=st.integers(1, 8),
    seed=st.integers(0, 2**31 - 1),
    little_endian=st.booleans(),
)
def test_roundtrip_property(h, w, seed, little_endian):
    arr = random_float32_bits(np.random.default_rng(seed), (h, w))
    back, _ = read_pfm(write_pfm(arr, little_endian=little_endian))
    assert np.array_equal(back.view(np.uint32), arr.view(np.uint32))
