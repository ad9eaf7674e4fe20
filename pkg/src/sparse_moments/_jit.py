"""Numba switch.

Set ``SPARSE_MOMENTS_DISABLE_NUMBA=1`` to force the pure-numpy kernels even
when numba is importable. The choice is made once, at import time.
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None
    HAVE_NUMBA = False

_disabled = os.environ.get("SPARSE_MOMENTS_DISABLE_NUMBA", "").strip().lower()
USE_NUMBA = HAVE_NUMBA and _disabled not in ("1", "true", "yes", "on")


def njit(*args, **kwargs):
    """``numba.njit`` with caching on, or a no-op decorator without numba."""
    if not HAVE_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
