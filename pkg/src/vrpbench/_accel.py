"""Numba switch for the hot kernels.

Set ``VRPBENCH_DISABLE_NUMBA=1`` to run every kernel as plain Python/numpy.
The flag is read once at import time.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

ENV_FLAG = "VRPBENCH_DISABLE_NUMBA"


def _truthy(value):
    return value.strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = numba is not None and not _truthy(os.environ.get(ENV_FLAG, ""))


def njit(func):
    """``numba.njit(cache=True, nogil=True)`` or the identity when disabled."""
    if not USE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
