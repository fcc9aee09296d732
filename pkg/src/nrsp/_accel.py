"""Numba switch for the pixel-loop kernels.

Set ``NRSP_DISABLE_NUMBA=1`` before import to run every kernel on its
pure numpy / interpreted path. Both paths must produce identical output;
``benchmarks/bench_kernels.py`` compares their speed.
"""
import os

_disabled = os.environ.get("NRSP_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _disabled:
        raise ImportError
    from numba import njit as _njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


def jit(func):
    """Compile ``func`` in nopython mode when numba is enabled, else return it untouched."""
    if HAS_NUMBA:
        return _njit(cache=True, nogil=True)(func)
    return func
