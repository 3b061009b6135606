"""Posterior draw containers and the moment-matched normal proposal."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .density import vectorized
from .errors import DimensionMismatch, SingularCovariance, TooFewSamples

_LOG_2PI = math.log(2.0 * math.pi)
JITTER = 1e-10


@dataclass(frozen=True)
class SampleSet:
    """Posterior draws stacked by row, with the chain each draw came from.

    Rows within a chain are kept in their stored order.
    """

    values: np.ndarray
    chain_id: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        values = np.atleast_2d(np.asarray(self.values, dtype=np.float64))
        chain_id = np.asarray(self.chain_id)
        if chain_id.ndim != 1 or chain_id.shape[0] != values.shape[0]:
            raise DimensionMismatch(
                f"{values.shape[0]} draws but {chain_id.shape[0]} chain labels"
            )
        if len(self.names) != values.shape[1]:
            raise DimensionMismatch(f"{values.shape[1]} columns but {len(self.names)} names")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "chain_id", chain_id)
        object.__setattr__(self, "names", tuple(self.names))

    @classmethod
    def from_chains(cls, chains: Sequence[np.ndarray], names: Sequence[str] | None = None):
        """Stack a list of (m_c, p) chain arrays; chains are labelled 0, 1, ..."""
        chains = [np.atleast_2d(np.asarray(c, dtype=np.float64)) for c in chains]
        if names is None:
            names = [f"theta{i}" for i in range(1, chains[0].shape[1] + 1)]
        labels = np.concatenate([np.full(c.shape[0], i) for i, c in enumerate(chains)])
        return cls(np.vstack(chains), labels, tuple(names))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def chains(self) -> list:
        """Chain labels in order of first appearance."""
        _, first = np.unique(self.chain_id, return_index=True)
        return [self.chain_id[i] for i in np.sort(first)]

    def chain_indices(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.chain_id == c) for c in self.chains()]

    def with_values(self, values: np.ndarray) -> SampleSet:
        return SampleSet(values, self.chain_id, self.names)

    def take(self, rows: np.ndarray) -> SampleSet:
        return SampleSet(self.values[rows], self.chain_id[rows], self.names)


def split_halves(samples: SampleSet) -> tuple[SampleSet, SampleSet]:
    """Split every chain into its first ceil(m/2) draws and the rest.

    The first halves are used to fit the proposal (or warp), the second
    halves enter the iterative scheme.
    """
    if samples.n < 4:
        raise TooFewSamples(f"need at least 4 draws, got {samples.n}")
    fit_rows, iter_rows = [], []
    for label, idx in zip(samples.chains(), samples.chain_indices()):
        if idx.size < 2:
            raise TooFewSamples(f"chain {label!r} has {idx.size} draw(s); at least 2 are needed")
        cut = math.ceil(idx.size / 2)
        fit_rows.append(idx[:cut])
        iter_rows.append(idx[cut:])
    return samples.take(np.concatenate(fit_rows)), samples.take(np.concatenate(iter_rows))


def fit_moments(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means and the Cholesky factor of the sample covariance (divisor n-1).

    Constant columns or fewer than p+1 draws raise SingularCovariance. Other
    failures get one retry with ``JITTER * mean(diag)`` added to the diagonal.
    """
    x = np.atleast_2d(np.asarray(values, dtype=np.float64))
    n, p = x.shape
    if n < p + 1:
        raise SingularCovariance(f"{n} draws cannot give a full-rank covariance in {p} dimensions")
    mean = x.mean(axis=0)
    cov = np.atleast_2d(np.cov(x, rowvar=False, ddof=1))
    diag = np.diag(cov)
    if np.any(~np.isfinite(diag)) or np.any(diag <= 0.0):
        bad = [i for i in range(p) if not diag[i] > 0.0]
        raise SingularCovariance(f"parameter column(s) {bad} have zero or undefined variance")
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        try:
            chol = np.linalg.cholesky(cov + JITTER * diag.mean() * np.eye(p))
        except np.linalg.LinAlgError as exc:
            raise SingularCovariance("covariance is not positive definite after jitter") from exc
    if not np.all(np.diag(chol) > 0.0):
        raise SingularCovariance("Cholesky factor has a non-positive diagonal")
    return mean, chol


@dataclass(frozen=True)
class GaussianProposal:
    """Multivariate normal N(mean, chol @ chol.T)."""

    mean: np.ndarray
    chol: np.ndarray

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def log_norm_const(self) -> float:
        return -0.5 * self.dim * _LOG_2PI - float(np.log(np.diag(self.chol)).sum())

    def logpdf(self, xi) -> float | np.ndarray:
        return proposal_log_density(self, xi)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return sample_proposal(self, n, rng)


def fit_proposal(fit_half: SampleSet | np.ndarray) -> GaussianProposal:
    """Method-of-moments normal proposal from (unconstrained) draws."""
    values = fit_half.values if isinstance(fit_half, SampleSet) else fit_half
    mean, chol = fit_moments(values)
    return GaussianProposal(mean, chol)


def sample_proposal(g: GaussianProposal, n2: int, rng: np.random.Generator) -> np.ndarray:
    if n2 < 1:
        raise ValueError("n2 must be at least 1")
    z = rng.standard_normal((n2, g.dim))
    return g.mean + z @ g.chol.T


def proposal_log_density(g: GaussianProposal, xi) -> float | np.ndarray:
    """Normalized log pdf; the quadratic form uses a triangular solve."""
    x = np.asarray(xi, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    z = solve_triangular(g.chol, (x - g.mean).T, lower=True, check_finite=False)
    out = g.log_norm_const - 0.5 * np.einsum("ij,ij->j", z, z)
    return float(out[0]) if single else out


def proposal_evaluator(g: GaussianProposal):
    """``g``'s log density as a vectorized evaluator."""
    return vectorized(lambda xi: proposal_log_density(g, np.atleast_2d(xi)))


def standard_normal_log_density(xi) -> np.ndarray:
    x = np.atleast_2d(np.asarray(xi, dtype=np.float64))
    return -0.5 * x.shape[1] * _LOG_2PI - 0.5 * np.einsum("ij,ij->i", x, x)


vectorized(standard_normal_log_density)
