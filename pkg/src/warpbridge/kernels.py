"""Kernel backend selection.

The compiled Cython module is used when it imports; otherwise the numpy
fallback is used. Setting ``WARPBRIDGE_BACKEND=python`` forces the fallback. ``BACKEND`` names the active one and :func:`get_backend`
returns either implementation explicitly (for tests and benchmarks).
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_use_compiled = _compiled is not None and os.environ.get("WARPBRIDGE_BACKEND", "").lower() != "python"
_active: ModuleType = _compiled if _use_compiled else _kernels_py
BACKEND = "compiled" if _use_compiled else "python"


def available_backends() -> list[str]:
    return ["compiled", "python"] if _compiled is not None else ["python"]


def get_backend(name: str | None = None) -> ModuleType:
    if name is None:
        return _active
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("the compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def logsumexp(x) -> float:
    return _active.logsumexp(x)


def bridge_iterate(log_l1, log_l2, log_s1, log_s2, log_init, tol, max_iter, trace):
    return _active.bridge_iterate(log_l1, log_l2, log_s1, log_s2, log_init, tol, max_iter, trace)


def autocovariance(x, max_lag):
    # numpy's BLAS dot beats a compiled loop here, so there is no compiled version
    return _kernels_py.autocovariance(x, max_lag)
