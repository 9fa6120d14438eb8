"""Optional numba acceleration.

Set ``SSMP_DISABLE_NUMBA=1`` before import to force the pure-numpy kernels.
"""
import os

_disabled = os.environ.get("SSMP_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _disabled:
        raise ImportError
    from numba import njit
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f

USE_NUMBA = HAS_NUMBA
