"""Backend selection for the hot kernels.

Every kernel module defines a numba implementation and a vectorised numpy
implementation of the same routine. Which one is exported is decided once, at
import time:

* ``MBMM_DISABLE_NUMBA=1`` forces the numpy path.
* If numba cannot be imported the numpy path is used as well.

Both implementations stay importable under explicit ``*_numba`` / ``*_numpy``
names so they can be compared against each other in tests and benchmarks.
"""

import os

_FALSY = {"", "0", "false", "no", "off"}


def _env_disabled():
    return os.environ.get("MBMM_DISABLE_NUMBA", "").strip().lower() not in _FALSY


try:
    import numba as _numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an install-time dependency
    _numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _env_disabled()


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise.

    Compilation is lazy, so decorating does not cost anything when the numpy
    backend ends up selected.
    """
    if not HAVE_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return _numba.njit(*args, **kwargs)


def pick(numba_impl, numpy_impl):
    return numba_impl if USE_NUMBA else numpy_impl


def backend():
    return "numba" if USE_NUMBA else "numpy"
