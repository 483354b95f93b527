"""Numba switch.

Set ``MLBOUNDS_DISABLE_NUMBA=1`` to force the pure-numpy kernels (useful when
debugging, or on platforms without an LLVM toolchain).
"""

import os

_FLAG = os.environ.get("MLBOUNDS_DISABLE_NUMBA", "").strip().lower()

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise.

    The decorated function is always compiled when numba exists (even if
    USE_NUMBA is off) so the benchmark can compare both paths in one process;
    compilation is lazy, so nothing is paid unless the kernel is called.
    """
    if HAVE_NUMBA:
        return numba.njit(*args, cache=True, **kwargs)

    def wrap(fn):
        return fn

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return wrap
