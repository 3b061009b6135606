"""Bayes factors and posterior model probabilities from log marginal likelihoods."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import DimensionMismatch, InvalidPrior
from .estimator import BridgeResult

# exp() overflows a double above this
MAX_EXP = 709.0


def _log_ml(result) -> np.ndarray:
    if isinstance(result, BridgeResult):
        return np.asarray(result.log_ml, dtype=np.float64)
    return np.atleast_1d(np.asarray(result, dtype=np.float64))


@dataclass(frozen=True)
class BayesFactor:
    log_bf: float
    favored: str

    @property
    def overflow(self) -> bool:
        return self.log_bf > MAX_EXP

    @property
    def bf(self) -> float:
        return math.inf if self.overflow else math.exp(self.log_bf)


def bayes_factor(a, b, labels: tuple[str, str] = ("a", "b")) -> BayesFactor:
    """BF of ``a`` over ``b``, from median log estimates when repeated.

    Ties favor ``a``.
    """
    log_bf = float(np.median(_log_ml(a)) - np.median(_log_ml(b)))
    return BayesFactor(log_bf=log_bf, favored=labels[0] if log_bf >= 0 else labels[1])


@dataclass(frozen=True)
class PosteriorProbMatrix:
    """Rows are repetitions, columns are models."""

    probs: np.ndarray
    labels: tuple[str, ...]

    def column(self, label: str) -> np.ndarray:
        return self.probs[:, self.labels.index(label)]


def post_prob(
    results: Sequence,
    prior_probs: Sequence[float] | None = None,
    labels: Sequence[str] | None = None,
) -> PosteriorProbMatrix:
    """Posterior model probabilities, one row per repetition.

    ``results`` holds BridgeResults or arrays of log marginal likelihoods.
    Single-repetition entries broadcast against repeated ones; two different
    repetition counts above one are an error. Priors default to uniform.
    """
    m = len(results)
    if m < 2:
        raise DimensionMismatch("need at least two models")
    labels = tuple(labels) if labels is not None else tuple(f"M{i + 1}" for i in range(m))
    if len(labels) != m:
        raise DimensionMismatch(f"{len(labels)} labels for {m} models")

    if prior_probs is None:
        log_prior = np.full(m, -math.log(m))
    else:
        prior = np.asarray(prior_probs, dtype=np.float64)
        if prior.shape != (m,):
            raise InvalidPrior(f"expected {m} prior probabilities, got {prior.shape}")
        if not np.all(np.isfinite(prior)) or np.any(prior <= 0) or abs(prior.sum() - 1) > 1e-10:
            raise InvalidPrior(f"prior probabilities must be positive and sum to 1: {prior}")
        log_prior = np.log(prior)

    columns = [_log_ml(r) for r in results]
    counts = {c.size for c in columns if c.size > 1}
    if len(counts) > 1:
        raise DimensionMismatch(f"results have different repetition counts: {sorted(counts)}")
    reps = counts.pop() if counts else 1
    lml = np.column_stack([np.broadcast_to(c, (reps,)) for c in columns])

    log_post = lml + log_prior
    log_post = log_post - logsumexp(log_post, axis=1, keepdims=True)
    return PosteriorProbMatrix(np.exp(log_post), labels)
