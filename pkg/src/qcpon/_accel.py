"""Numba acceleration shim.

Hot numeric kernels (:mod:`qcpon._kernels`) are written as scalar/loop code
and compiled with numba's ``@njit`` by default.  Setting the environment
variable ``QCPON_BACKEND=numpy`` disables compilation: the same functions
then run as plain Python, and vectorized numpy alternatives take over where
an interpreted loop would be too slow (the seven-band enumeration).

``benchmarks/bench_backends.py`` compares the two paths.
"""

import os

_requested = os.environ.get("QCPON_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise RuntimeError(
        f"QCPON_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

USE_NUMBA = _requested == "numba"

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # numba missing: run uncompiled
        USE_NUMBA = False

if not USE_NUMBA:

    def njit(*args, **kwargs):
        """Pass-through replacement for numba.njit."""
        if args and callable(args[0]):
            return args[0]

        def decorate(func):
            return func

        return decorate


BACKEND = "numba" if USE_NUMBA else "numpy"
