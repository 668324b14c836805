"""JIT switch.

Kernels in :mod:`gibbsvar.kernels` are written twice: a numba ``@njit`` loop
version and a vectorized numpy version. Which one is bound at import time is
decided here.

Set ``GIBBSVAR_NUMBA=0`` to force the numpy path. If numba cannot be imported
the numpy path is used and a :class:`PerformanceWarning` is emitted once.
"""
import os
import warnings

from .errors import PerformanceWarning

_FLAG = os.environ.get("GIBBSVAR_NUMBA", "1").strip().lower()
_REQUESTED = _FLAG not in ("0", "false", "no", "off")

try:
    if not _REQUESTED:
        raise ImportError
    from numba import njit as _njit

    USE_NUMBA = True
except ImportError:
    USE_NUMBA = False
    if _REQUESTED:
        warnings.warn(
            "numba is not available; falling back to numpy kernels",
            PerformanceWarning,
            stacklevel=2,
        )


def njit(*args, **kwargs):
    """``numba.njit`` with ``cache=True``; identity decorator when numba is off."""
    if USE_NUMBA:
        kwargs.setdefault("cache", True)
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda func: func


def backend():
    return "numba" if USE_NUMBA else "numpy"
