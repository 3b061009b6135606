"""Conventions for log-density evaluators.

An evaluator is any callable returning a log density. By default it is
called once per point with a 1-D array of length p. Callables carrying a
true ``vectorized`` attribute are instead called with an (n, p) block and
must return n values; :func:`vectorized` sets that attribute.
"""

from __future__ import annotations

from collections.abc import Callable

import numpy as np

from .errors import NonFiniteDensity

LogDensity = Callable[[np.ndarray], "float | np.ndarray"]


def vectorized(fn: LogDensity) -> LogDensity:
    """Mark ``fn`` as accepting an (n, p) block of points."""
    fn.vectorized = True
    return fn


def is_vectorized(fn: LogDensity) -> bool:
    return bool(getattr(fn, "vectorized", False))


def evaluate(fn: LogDensity, points: np.ndarray) -> np.ndarray:
    """Evaluate ``fn`` at each row of ``points`` and return a float vector."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if is_vectorized(fn):
        out = np.asarray(fn(points), dtype=np.float64).reshape(-1)
        if out.shape[0] != points.shape[0]:
            raise ValueError(
                f"vectorized evaluator returned {out.shape[0]} values for {points.shape[0]} points"
            )
        return out
    return np.fromiter((fn(row) for row in points), dtype=np.float64, count=points.shape[0])


def check_finite(values: np.ndarray, what: str = "log density", offset: int = 0) -> None:
    """Raise NonFiniteDensity on NaN or +inf; -inf (zero density) is allowed."""
    bad = np.isnan(values) | (values == np.inf)
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise NonFiniteDensity(
            f"{what} is {values[row]} at row {row + offset}", row=row + offset
        )
