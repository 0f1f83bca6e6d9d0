"""Optional numba acceleration.

Kernels in this package are written in a plain array-at-a-time style that runs
unmodified under CPython.  When numba is importable (and ``GRAMLIN_PURE`` is not
set) the same functions are compiled with ``nogil=True`` so thread pools achieve
real parallelism.  Semantics are identical either way because the compiled and
interpreted paths share one source function.
"""

from __future__ import annotations

import os
from typing import Any, Callable

_PURE = os.environ.get("GRAMLIN_PURE", "") not in ("", "0")

if not _PURE:
    try:
        import numba as _numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _numba = None
        _PURE = True
else:
    _numba = None

HAVE_NUMBA = _numba is not None


def jit(func: Callable[..., Any]) -> Callable[..., Any]:
    """Compile *func* with numba when available; otherwise return it unchanged."""
    if _numba is None:
        return func
    return _numba.njit(cache=True, nogil=True)(func)
