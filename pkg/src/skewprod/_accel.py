"""Numba selection for the hot kernels.

Set ``SKEWPROD_DISABLE_NUMBA=1`` to run every kernel as plain Python over
numpy arrays. The flag is read once at import time.
"""
from __future__ import annotations

import os

_OFF = {"1", "true", "yes", "on"}

USE_NUMBA = os.environ.get("SKEWPROD_DISABLE_NUMBA", "").strip().lower() not in _OFF

if USE_NUMBA:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when enabled, otherwise an identity decorator."""
    if USE_NUMBA:
        kwargs.setdefault("cache", True)
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def backend() -> str:
    return "numba" if USE_NUMBA else "python"
