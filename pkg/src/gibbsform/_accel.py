"""Numba switch.

Set ``GIBBSFORM_USE_NUMBA=0`` to force the pure-numpy kernels.  When numba
is not importable the numpy kernels are used regardless of the flag.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is optional
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("GIBBSFORM_USE_NUMBA", "1").strip().lower() not in (
    "0",
    "false",
    "no",
    "off",
)


def njit(fn):
    """Compile ``fn`` in nopython mode, or return None without numba."""
    if not HAVE_NUMBA:
        return None
    return numba.njit(cache=True)(fn)
