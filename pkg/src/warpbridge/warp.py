"""Warp-III: standardize, then randomly reflect, the unconstrained draws.

Each draw is mapped to ``eta = b * R^-1 (xi - mu)`` with ``b`` uniform on
{-1, +1}. The induced density of ``eta`` is the two-component mixture

    R_det * [q(mu - R eta) + q(mu + R eta)] / 2

which keeps the normalizing constant of ``q`` and is bridged against a
standard normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .density import LogDensity, check_finite, evaluate, vectorized
from .proposal import SampleSet, fit_moments

_LOG_2 = math.log(2.0)


@dataclass(frozen=True)
class WarpSpec:
    mean: np.ndarray
    chol: np.ndarray

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def log_det_R(self) -> float:
        return float(np.log(np.diag(self.chol)).sum())


def fit_warp(fit_half: SampleSet | np.ndarray) -> WarpSpec:
    """Location and Cholesky scale of the fit half (same moments as the normal proposal)."""
    values = fit_half.values if isinstance(fit_half, SampleSet) else fit_half
    mean, chol = fit_moments(values)
    return WarpSpec(mean, chol)


def standardize(w: WarpSpec, xi_samples: np.ndarray) -> np.ndarray:
    """R^-1 (xi - mu) for every row, by triangular solve."""
    x = np.atleast_2d(np.asarray(xi_samples, dtype=np.float64))
    return solve_triangular(w.chol, (x - w.mean).T, lower=True, check_finite=False).T


def warp_samples(w: WarpSpec, xi_samples: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    z = standardize(w, xi_samples)
    signs = rng.choice(np.array([-1.0, 1.0]), size=z.shape[0])
    return signs[:, None] * z


def warped_log_density(base_xi: LogDensity, w: WarpSpec) -> LogDensity:
    """Log of the warped mixture density as a function of eta.

    Each point costs exactly two evaluations of ``base_xi``.
    """

    @vectorized
    def log_density_eta(eta):
        e = np.atleast_2d(np.asarray(eta, dtype=np.float64))
        shift = e @ w.chol.T
        lo = evaluate(base_xi, w.mean - shift)
        hi = evaluate(base_xi, w.mean + shift)
        check_finite(lo, "base log density")
        check_finite(hi, "base log density")
        return w.log_det_R + np.logaddexp(lo, hi) - _LOG_2

    return log_density_eta
