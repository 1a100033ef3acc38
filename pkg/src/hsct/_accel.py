"""Optional numba acceleration.

The compiled kernels are used when numba imports and ``HSCT_NO_NUMBA`` is
unset (or ``0``).  Setting ``HSCT_NO_NUMBA=1`` routes every hot loop through
the pure-numpy reference implementation instead.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def numba_enabled():
    """True when the compiled kernels should be used."""
    if numba is None:
        return False
    return os.environ.get("HSCT_NO_NUMBA", "0").strip() in ("", "0")


def njit(fn):
    """Compile ``fn`` with numba (nogil, cached); identity without numba."""
    if numba is None:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def py_func(fn):
    """Return the uncompiled Python function behind a jitted kernel."""
    return getattr(fn, "py_func", fn)
