"""Per-parameter bounds and the transformations to unconstrained space.

Each parameter is mapped to the real line on its own, so the Jacobian of
the inverse map is diagonal and its log-determinant is a sum:

=============  ======================  ======================  ===================
bound          forward                 inverse                 |d theta / d xi|
=============  ======================  ======================  ===================
unbounded      xi = theta              theta = xi              1
lower l        xi = log(theta - l)     theta = exp(xi) + l     exp(xi)
upper u        xi = log(u - theta)     theta = u - exp(xi)     exp(xi)
both (l, u)    xi = Phi^-1(z)          theta = (u-l)Phi(xi)+l  (u - l) phi(xi)
=============  ======================  ======================  ===================

with ``z = (theta - l) / (u - l)``.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import ndtr, ndtri

from .density import LogDensity, check_finite, evaluate, vectorized
from .errors import BoundViolation, InputError

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
# smallest tail probability handed to the inverse normal cdf
PROBIT_LOW = 1e-300


class BoundKind(Enum):
    UNBOUNDED = "unbounded"
    LOWER = "lower"
    UPPER = "upper"
    DOUBLE = "double"


@dataclass(frozen=True)
class ParameterBound:
    """Bounds of one parameter; ``None`` means that side is open."""

    lower: float | None = None
    upper: float | None = None

    def __post_init__(self):
        for side in (self.lower, self.upper):
            if side is not None and not math.isfinite(side):
                raise InputError(f"bounds must be finite where present, got {side}")
        if self.lower is not None and self.upper is not None and not self.lower < self.upper:
            raise InputError(f"lower bound {self.lower} must be below upper bound {self.upper}")

    @classmethod
    def from_limits(cls, lb: float, ub: float) -> ParameterBound:
        """Build from limits where +-inf means unbounded."""
        lb, ub = float(lb), float(ub)
        if lb == math.inf or ub == -math.inf or math.isnan(lb) or math.isnan(ub):
            raise InputError(f"invalid bounds ({lb}, {ub})")
        return cls(None if lb == -math.inf else lb, None if ub == math.inf else ub)

    @property
    def kind(self) -> BoundKind:
        if self.lower is None:
            return BoundKind.UNBOUNDED if self.upper is None else BoundKind.UPPER
        return BoundKind.LOWER if self.upper is None else BoundKind.DOUBLE

    @property
    def limits(self) -> tuple[float, float]:
        return (
            -math.inf if self.lower is None else self.lower,
            math.inf if self.upper is None else self.upper,
        )


UNBOUNDED = ParameterBound()


@dataclass(frozen=True)
class ParameterSpec:
    """Ordered parameter names with one bound each."""

    names: tuple[str, ...]
    bounds: tuple[ParameterBound, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "bounds", tuple(self.bounds))
        if len(self.names) == 0:
            raise InputError("a parameter spec needs at least one parameter")
        if len(self.names) != len(self.bounds):
            raise InputError(f"{len(self.names)} names but {len(self.bounds)} bounds")
        if len(set(self.names)) != len(self.names):
            raise InputError(f"parameter names must be unique: {list(self.names)}")

    @property
    def dim(self) -> int:
        return len(self.names)

    @classmethod
    def unbounded(cls, names: Sequence[str] | int) -> ParameterSpec:
        if isinstance(names, int):
            names = [f"theta{i}" for i in range(1, names + 1)]
        return cls(tuple(names), tuple(UNBOUNDED for _ in names))

    @classmethod
    def from_limits(
        cls,
        names: Sequence[str],
        lb: Mapping[str, float] | None = None,
        ub: Mapping[str, float] | None = None,
    ) -> ParameterSpec:
        """Named lower/upper limits; missing names are unbounded on that side."""
        lb = lb or {}
        ub = ub or {}
        unknown = (set(lb) | set(ub)) - set(names)
        if unknown:
            raise InputError(f"bounds given for unknown parameters: {sorted(unknown)}")
        bounds = [
            ParameterBound.from_limits(lb.get(n, -math.inf), ub.get(n, math.inf)) for n in names
        ]
        return cls(tuple(names), tuple(bounds))

    def _columns(self):
        lo = np.array([b.limits[0] for b in self.bounds])
        hi = np.array([b.limits[1] for b in self.bounds])
        kinds = [b.kind for b in self.bounds]
        masks = {k: np.array([kk is k for kk in kinds]) for k in BoundKind}
        return lo, hi, masks


@dataclass
class TransformDiagnostics:
    """Counts probit inputs that had to be clamped into the safe range."""

    tail_clamps: int = 0


def _as_points(spec: ParameterSpec, x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.ndim != 2 or arr.shape[1] != spec.dim:
        raise InputError(f"expected {spec.dim} columns, got array of shape {np.shape(x)}")
    return arr, single


def to_unconstrained(
    spec: ParameterSpec, theta, diagnostics: TransformDiagnostics | None = None
) -> np.ndarray:
    """Map constrained draws to the real line.

    ``theta`` may be a single vector or an (n, p) matrix; the result has the
    same shape. Values outside a bound, or exactly on one, raise
    :class:`BoundViolation`.
    """
    th, single = _as_points(spec, theta)
    lo, hi, masks = spec._columns()

    bad = ~np.isfinite(th) | (th <= lo) | (th >= hi)
    if bad.any():
        row, col = map(int, np.argwhere(bad)[0])
        name = spec.names[col]
        raise BoundViolation(
            f"draw {row} of {name!r} is {th[row, col]!r}, outside the open interval "
            f"({lo[col]}, {hi[col]})",
            row=row,
            column=name,
        )

    xi = th.copy()
    m = masks[BoundKind.LOWER]
    xi[:, m] = np.log(th[:, m] - lo[m])
    m = masks[BoundKind.UPPER]
    xi[:, m] = np.log(hi[m] - th[:, m])
    m = masks[BoundKind.DOUBLE]
    if m.any():
        width = hi[m] - lo[m]
        below = (th[:, m] - lo[m]) / width
        above = (hi[m] - th[:, m]) / width
        # invert from whichever tail is closer
        lower_tail = below <= 0.5
        z = np.where(lower_tail, below, above)
        clamped = z < PROBIT_LOW
        z = np.maximum(z, PROBIT_LOW)
        q = ndtri(z)
        xi[:, m] = np.where(lower_tail, q, -q)
        if diagnostics is not None:
            diagnostics.tail_clamps += int(clamped.sum())
    return xi[0] if single else xi


def from_unconstrained(spec: ParameterSpec, xi) -> np.ndarray:
    """Map unconstrained vectors back to the constrained parameterization."""
    x, single = _as_points(spec, xi)
    lo, hi, masks = spec._columns()
    th = x.copy()
    with np.errstate(over="ignore"):
        m = masks[BoundKind.LOWER]
        th[:, m] = np.exp(x[:, m]) + lo[m]
        m = masks[BoundKind.UPPER]
        th[:, m] = hi[m] - np.exp(x[:, m])
    m = masks[BoundKind.DOUBLE]
    if m.any():
        width = hi[m] - lo[m]
        v = x[:, m]
        th[:, m] = np.where(v <= 0, lo[m] + width * ndtr(v), hi[m] - width * ndtr(-v))
    return th[0] if single else th


def log_jacobian(spec: ParameterSpec, xi) -> float | np.ndarray:
    """Sum over components of log|d theta_i / d xi_i|, computed in xi."""
    x, single = _as_points(spec, xi)
    lo, hi, masks = spec._columns()
    out = np.zeros(x.shape[0])
    half = masks[BoundKind.LOWER] | masks[BoundKind.UPPER]
    if half.any():
        out += x[:, half].sum(axis=1)
    m = masks[BoundKind.DOUBLE]
    if m.any():
        out += (np.log(hi[m] - lo[m]) - 0.5 * x[:, m] ** 2 - _HALF_LOG_2PI).sum(axis=1)
    return float(out[0]) if single else out


def transformed_log_density(base: LogDensity, spec: ParameterSpec) -> LogDensity:
    """Jacobian-adjusted log density on the unconstrained space.

    The returned evaluator is vectorized and has the same normalizing
    constant as ``base``.
    """

    @vectorized
    def log_density_xi(xi):
        x = np.atleast_2d(np.asarray(xi, dtype=np.float64))
        vals = evaluate(base, from_unconstrained(spec, x))
        check_finite(vals, "base log density")
        return vals + log_jacobian(spec, x)

    log_density_xi.spec = spec
    return log_density_xi
