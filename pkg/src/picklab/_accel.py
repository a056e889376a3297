"""Numba detection and the kernel-backend switch.

Set ``PICKLAB_KERNELS=numpy`` to force the pure-numpy fallback even when numba
is importable. Any other value (or unset) uses numba when available.
"""
from __future__ import annotations

import os

try:
    import numba as _numba
except ImportError:  # pragma: no cover - exercised only without numba
    _numba = None

HAS_NUMBA = _numba is not None


def numba_enabled() -> bool:
    return HAS_NUMBA and os.environ.get("PICKLAB_KERNELS", "numba").lower() != "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when numba is installed, identity decorator otherwise."""
    if HAS_NUMBA:
        return _numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn
