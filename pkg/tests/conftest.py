import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_float32_bits(rng, shape):
    """float32 arrays drawn from raw bit patterns, non-finites replaced.

    Exercises denormals and -0.0, which a bit-exact codec must survive.
    """
    bits = rng.integers(0, 2**32, size=shape, dtype=np.uint64).astype(np.uint32)
    arr = bits.view(np.float32).copy()
    bad = ~np.isfinite(arr)
    arr[bad] = rng.standard_normal(int(bad.sum())).astype(np.float32)
    return arr
