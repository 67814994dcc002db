"""Hot numeric kernels with a selectable backend.

The semi-global path sweep, census transform and masked median dominate
runtime, so each exists twice: a numba ``@njit`` version and a vectorized
pure-numpy fallback.  The env var ``STEREOBENCH_NUMBA`` picks the default
binding (``0``/``false``/``off``/``no`` forces numpy; anything else, or
unset, uses numba when it imports cleanly).

Both backends stay importable directly (``kernels.numba_backend``,
``kernels.numpy_backend``) for differential tests and the benchmark in
``benchmarks/bench_kernels.py``.
"""

import os

from . import numpy_backend


def _numba_requested() -> bool:
    flag = os.environ.get("STEREOBENCH_NUMBA", "1").strip().lower()
    return flag not in {"0", "false", "off", "no"}


BACKEND = "numpy"
_impl = numpy_backend
if _numba_requested():
    try:
        from . import numba_backend as _impl  # noqa: F811

        BACKEND = "numba"
    except ImportError:
        pass

sgm_sweep = _impl.sgm_sweep
census_bits = _impl.census_bits
median_filter_masked = _impl.median_filter_masked
