"""Optimal bridge sampling estimate of a log normalizing constant."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .density import LogDensity, check_finite, evaluate
from .errors import AllZeroRatios, DimensionMismatch, InputError
from .paramspace import ParameterSpec, TransformDiagnostics, to_unconstrained, transformed_log_density
from .proposal import (
    SampleSet,
    fit_proposal,
    proposal_evaluator,
    sample_proposal,
    split_halves,
    standard_normal_log_density,
)
from .warp import fit_warp, warp_samples, warped_log_density

logger = logging.getLogger(__name__)

METHODS = ("normal", "warp3")
# rows per evaluation block; fixed so results never depend on the worker count
CHUNK_ROWS = 2048


@dataclass(frozen=True)
class BridgeConfig:
    method: str = "normal"
    max_iter: int = 1000
    tol: float = 1e-10
    n2: int | None = None  # None: same as the number of posterior draws used
    repetitions: int = 1
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise InputError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.tol > 0:
            raise InputError("tol must be positive")
        if self.max_iter < 1:
            raise InputError("max_iter must be at least 1")
        if self.repetitions < 1:
            raise InputError("repetitions must be at least 1")
        if self.n2 is not None and self.n2 < 1:
            raise InputError("n2 must be at least 1")
        if self.workers < 1:
            raise InputError("workers must be at least 1")


@dataclass(frozen=True)
class LogRatioVectors:
    """log l1 (posterior draws) and log l2 (proposal draws)."""

    log_l1: np.ndarray
    log_l2: np.ndarray

    @property
    def n1(self) -> int:
        return self.log_l1.shape[0]

    @property
    def n2(self) -> int:
        return self.log_l2.shape[0]


@dataclass
class BridgeResult:
    log_ml: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    method: str
    n1: int
    n2: int
    s1: float
    s2: float
    seed: int = 0
    tol: float = 1e-10
    max_iter: int = 1000
    tail_clamps: int = 0
    # diagnostics kept in memory only
    log_ratios: list[LogRatioVectors] = field(default_factory=list, repr=False)
    iterate_chain_id: np.ndarray | None = field(default=None, repr=False)

    @property
    def repetitions(self) -> int:
        return int(self.log_ml.shape[0])

    @property
    def estimate(self) -> float:
        """Median log marginal likelihood over repetitions."""
        return float(np.median(self.log_ml))


def sampling_fractions(n1: int, n2: int) -> tuple[float, float]:
    return n1 / (n1 + n2), n2 / (n1 + n2)


def _log_ratio_vector(log_q, g_logpdf, points, workers, what):
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    starts = range(0, points.shape[0], CHUNK_ROWS)

    def block(start):
        pts = points[start : start + CHUNK_ROWS]
        num = evaluate(log_q, pts)
        check_finite(num, f"{what}: target log density", offset=start)
        den = evaluate(g_logpdf, pts)
        check_finite(den, f"{what}: proposal log density", offset=start)
        return num - den

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(block, starts))
    else:
        parts = [block(s) for s in starts]
    return np.concatenate(parts) if parts else np.empty(0)


def compute_log_ratios(
    log_q: LogDensity,
    g_logpdf: LogDensity,
    post_points: np.ndarray,
    prop_points: np.ndarray,
    workers: int = 1,
) -> LogRatioVectors:
    """log l = log q - log g at posterior and proposal points.

    Rows are evaluated in fixed blocks of ``CHUNK_ROWS`` that are spread over
    ``workers`` threads, so the output does not depend on ``workers``.
    """
    post_points = np.atleast_2d(post_points)
    prop_points = np.atleast_2d(prop_points)
    if post_points.shape[1] != prop_points.shape[1]:
        raise DimensionMismatch(
            f"posterior points have {post_points.shape[1]} columns, "
            f"proposal points {prop_points.shape[1]}"
        )
    return LogRatioVectors(
        _log_ratio_vector(log_q, g_logpdf, post_points, workers, "posterior draws"),
        _log_ratio_vector(log_q, g_logpdf, prop_points, workers, "proposal draws"),
    )


def run_iterative_scheme(
    lr: LogRatioVectors, config: BridgeConfig | None = None, *, return_trace: bool = False
):
    """Iterate the optimal-bridge update to convergence, entirely in log space.

    Starts from the log mean of l2 and stops once successive log estimates
    differ by less than ``config.tol``.

    Returns
    -------
    (log_ml, iterations, converged), plus the array of iterates when
    ``return_trace`` is set.
    """
    config = config or BridgeConfig()
    l1 = np.ascontiguousarray(lr.log_l1, dtype=np.float64)
    l2 = np.ascontiguousarray(lr.log_l2, dtype=np.float64)
    if l1.size == 0 or l2.size == 0:
        raise DimensionMismatch("both ratio vectors must be nonempty")
    for name, v in (("log_l1", l1), ("log_l2", l2)):
        if np.isnan(v).any() or (v == np.inf).any():
            raise InputError(f"{name} contains NaN or +inf")
    if np.all(l2 == -np.inf):
        if np.all(l1 == -np.inf):
            raise AllZeroRatios("every bridge ratio is zero")
        raise AllZeroRatios("the target density is zero at every proposal draw")

    s1, s2 = sampling_fractions(l1.size, l2.size)
    log_init = kernels.logsumexp(l2) - math.log(l2.size)
    trace = np.empty(config.max_iter + 1)
    log_ml, n_iter, converged = kernels.bridge_iterate(
        l1, l2, math.log(s1), math.log(s2), log_init, config.tol, config.max_iter, trace
    )
    if not converged:
        logger.warning(
            "bridge iteration stopped after %d iterations without reaching tol=%g",
            n_iter,
            config.tol,
        )
    out = (float(log_ml), int(n_iter), bool(converged))
    if return_trace:
        return out + (trace[: n_iter + 1].copy(),)
    return out


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream,)))


def bridge_sampler(
    samples: SampleSet,
    log_posterior: LogDensity,
    spec: ParameterSpec,
    config: BridgeConfig | None = None,
) -> BridgeResult:
    """Estimate the log marginal likelihood from posterior draws.

    Parameters
    ----------
    samples : SampleSet
        Draws in the original parameterization, columns ordered as in ``spec``.
    log_posterior : callable
        Unnormalized log posterior over the original parameters.
    spec : ParameterSpec
        Parameter bounds; determines the transformation to the real line.
    config : BridgeConfig, optional
        Method, convergence settings, repetitions and seed.

    Returns
    -------
    BridgeResult
        One estimate per repetition. Posterior draws are fixed across
        repetitions; proposal draws are fresh each time.
    """
    config = config or BridgeConfig()
    if tuple(samples.names) != tuple(spec.names):
        raise DimensionMismatch(
            f"sample columns {list(samples.names)} do not match parameters {list(spec.names)}"
        )
    diag = TransformDiagnostics()
    xi = samples.with_values(to_unconstrained(spec, samples.values, diag))
    fit_half, iter_half = split_halves(xi)
    log_q_xi = transformed_log_density(log_posterior, spec)

    if config.method == "normal":
        g = fit_proposal(fit_half)
        target, g_logpdf = log_q_xi, proposal_evaluator(g)
        post_points = iter_half.values

        def draw(rng, n2):
            return sample_proposal(g, n2, rng)

    else:
        w = fit_warp(fit_half)
        target, g_logpdf = warped_log_density(log_q_xi, w), standard_normal_log_density
        post_points = warp_samples(w, iter_half.values, _rng(config.seed, 0))

        def draw(rng, n2):
            return rng.standard_normal((n2, spec.dim))

    n1 = post_points.shape[0]
    n2 = config.n2 or n1
    s1, s2 = sampling_fractions(n1, n2)
    log_l1 = _log_ratio_vector(target, g_logpdf, post_points, config.workers, "posterior draws")

    log_ml, iters, conv, ratios = [], [], [], []
    for rep in range(config.repetitions):
        prop_points = draw(_rng(config.seed, rep + 1), n2)
        log_l2 = _log_ratio_vector(target, g_logpdf, prop_points, config.workers, "proposal draws")
        lr = LogRatioVectors(log_l1, log_l2)
        est, it, ok = run_iterative_scheme(lr, config)
        log_ml.append(est)
        iters.append(it)
        conv.append(ok)
        ratios.append(lr)
        logger.debug("repetition %d: log_ml=%.6f after %d iterations", rep, est, it)

    return BridgeResult(
        log_ml=np.array(log_ml),
        iterations=np.array(iters, dtype=int),
        converged=np.array(conv, dtype=bool),
        method=config.method,
        n1=n1,
        n2=n2,
        s1=s1,
        s2=s2,
        seed=config.seed,
        tol=config.tol,
        max_iter=config.max_iter,
        tail_clamps=diag.tail_clamps,
        log_ratios=ratios,
        iterate_chain_id=iter_half.chain_id,
    )
