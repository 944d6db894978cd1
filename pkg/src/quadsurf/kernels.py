"""Kernel selection: the compiled extension when present, else pure Python.

Set ``QSURF_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

try:
    if os.environ.get("QSURF_PURE_PYTHON") == "1":
        raise ImportError("fallback forced")
    from . import _ckernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def search(*args, backend: str | None = None, **kw):
    which = backend or BACKEND
    if which == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        return _compiled.search(*args, **kw)
    if which == "python":
        return _pykernels.search(*args, **kw)
    raise ValueError(f"unknown backend {which!r}")


def have_compiled() -> bool:
    return _compiled is not None


def short_vectors(R, bound2, half, max_count, backend: str | None = None):
    which = backend or BACKEND
    if which == "cython" and _compiled is not None:
        return _compiled.short_vectors(R, bound2, half, max_count)
    return _pykernels.short_vectors(R, bound2, half, max_count)
