"""Backend selection for the numeric kernels.

Set ``SUBRK_NUMBA=0`` to force the pure-numpy implementations.  Numba is used
by default when it can be imported.
"""

import os

_flag = os.environ.get("SUBRK_NUMBA", "1").strip().lower()

try:
    if _flag in ("0", "false", "no", "off"):
        raise ImportError("numba disabled by SUBRK_NUMBA")
    from numba import njit, prange  # noqa: F401

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn

    prange = range

BACKEND = "numba" if HAVE_NUMBA else "numpy"


def workers() -> int:
    """Worker count from ``SUBRK_WORKERS`` (results never depend on it)."""
    try:
        return max(1, int(os.environ.get("SUBRK_WORKERS", "1")))
    except ValueError:
        return 1
