"""Numba switch.

Set ``CCBR_DISABLE_NUMBA=1`` before importing ccbr to run every kernel on
its pure-numpy path. The flag is read once at import time.
"""

import os

_FLAG = os.environ.get("CCBR_DISABLE_NUMBA", "").strip().lower()

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and _FLAG not in {"1", "true", "yes", "on"}


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise.

    Compiled functions are always built when numba exists so that tests can
    compare both paths in one process; dispatch is decided by ``USE_NUMBA``.
    """
    kwargs.setdefault("cache", True)
    if not HAVE_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    return _numba.njit(*args, **kwargs)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
