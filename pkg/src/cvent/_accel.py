"""Numba switch.

Set ``CVENT_DISABLE_NUMBA=1`` to force the numpy/scipy code paths even when
numba is importable. The flag is read once, at import time.
"""
import os

_disabled = os.environ.get("CVENT_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _disabled:
        raise ImportError("numba disabled by CVENT_DISABLE_NUMBA")
    from numba import njit
    NUMBA_AVAILABLE = True
except ImportError:
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        # bare @njit and @njit(...) both supported
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def decorator(func):
            return func

        return decorator


def backend():
    return "numba" if NUMBA_AVAILABLE else "numpy"
