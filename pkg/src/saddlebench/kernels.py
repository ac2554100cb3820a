"""Backend selection for the hot loops.

The compiled extension ``saddlebench._kernels`` is used when importable;
otherwise the numpy implementations in ``_pykernels`` are used. Setting
``SADDLEBENCH_PURE_PYTHON=1`` forces the fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("SADDLEBENCH_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # pragma: no cover - depends on the build
        _compiled = None
    else:
        _impl = _compiled
        BACKEND = "cython"
else:
    _compiled = None

project_simplex = _impl.project_simplex
duality_gap = _impl.duality_gap
run_ogda = _impl.run_ogda
run_egda = _impl.run_egda
run_omwu = _impl.run_omwu
smoothing = _impl.smoothing


def compiled_available() -> bool:
    try:
        from . import _kernels  # noqa: F401
    except ImportError:
        return False
    return True


def get_backend(name: str):
    """Return the kernel module for ``name`` ("cython" or "python")."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")
