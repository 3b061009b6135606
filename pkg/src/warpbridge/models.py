"""Reference models, a random-walk Metropolis sampler and a quadrature oracle.

The built-in models have marginal likelihoods that are known exactly or are
cheap to integrate numerically, so they double as test beds for the
estimator.
"""

from __future__ import annotations

import csv
import hashlib
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy import optimize
from scipy.special import gammaln

from .density import LogDensity, check_finite, evaluate, vectorized
from .errors import DimensionTooHigh, EmptyChain, InputError, NonFiniteDensity
from .paramspace import (
    ParameterBound,
    ParameterSpec,
    from_unconstrained,
    to_unconstrained,
    transformed_log_density,
)
from .proposal import SampleSet

_LOG_2PI = math.log(2.0 * math.pi)

SLEEP_SHA256 = "ce4284663e0dd651af11f84b235024d07bac257707062c74b744935b27028445"
TTEST_PRIOR_SCALE = 1.0 / math.sqrt(2.0)
PRECISION_SHAPE = 1e-4
PRECISION_RATE = 1e-4


@dataclass(frozen=True)
class ModelDef:
    """An unnormalized log posterior with its parameter bounds.

    ``exact_sampler(n, rng)`` draws iid posterior samples in the original
    parameterization when the posterior is known in closed form.
    """

    name: str
    spec: ParameterSpec
    log_unnorm_posterior: LogDensity
    analytic_log_ml: float | None = None
    exact_sampler: Callable[[int, np.random.Generator], np.ndarray] | None = field(
        default=None, repr=False
    )
    init: np.ndarray | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.spec.dim


def gaussian_kernel(p: int) -> ModelDef:
    """exp(-theta.theta / 2) on R^p; log Z = (p/2) log 2 pi."""
    if p < 1:
        raise InputError("p must be at least 1")

    @vectorized
    def log_q(theta):
        t = np.atleast_2d(theta)
        return -0.5 * np.einsum("ij,ij->i", t, t)

    return ModelDef(
        name=f"gaussian_kernel({p})",
        spec=ParameterSpec.unbounded(p),
        log_unnorm_posterior=log_q,
        analytic_log_ml=0.5 * p * _LOG_2PI,
        exact_sampler=lambda n, rng: rng.standard_normal((n, p)),
        init=np.zeros(p),
    )


def beta_binomial(n: int, k: int) -> ModelDef:
    """Binomial likelihood with a uniform prior; log Z = -log(n + 1)."""
    if not 0 <= k <= n:
        raise InputError(f"need 0 <= k <= n, got n={n}, k={k}")
    log_choose = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)

    @vectorized
    def log_q(theta):
        t = np.atleast_2d(theta)[:, 0]
        with np.errstate(divide="ignore"):
            return log_choose + k * np.log(t) + (n - k) * np.log1p(-t)

    return ModelDef(
        name=f"beta_binomial({n},{k})",
        spec=ParameterSpec(("theta",), (ParameterBound(0.0, 1.0),)),
        log_unnorm_posterior=log_q,
        analytic_log_ml=-math.log(n + 1),
        exact_sampler=lambda m, rng: rng.beta(k + 1, n - k + 1, size=(m, 1)),
        init=np.array([(k + 1) / (n + 2)]),
    )


def skew_1d() -> ModelDef:
    """q(x) = exp(x - exp(x)) on R, the log of an Exp(1) variable; log Z = 0."""

    @vectorized
    def log_q(theta):
        t = np.atleast_2d(theta)[:, 0]
        return t - np.exp(t)

    return ModelDef(
        name="skew_1d",
        spec=ParameterSpec.unbounded(["x"]),
        log_unnorm_posterior=log_q,
        analytic_log_ml=0.0,
        exact_sampler=lambda n, rng: np.log(rng.standard_exponential((n, 1))),
        init=np.zeros(1),
    )


def sleep_differences() -> np.ndarray:
    """Paired differences (drug 2 minus drug 1) of the vendored sleep data."""
    raw = resources.files("warpbridge").joinpath("data/sleep.csv").read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    if digest != SLEEP_SHA256:
        raise RuntimeError(f"sleep.csv checksum mismatch: {digest}")
    rows = list(csv.DictReader(raw.decode("ascii").splitlines()))
    by_group = {
        g: {int(r["ID"]): float(r["extra"]) for r in rows if r["group"] == g} for g in ("1", "2")
    }
    ids = sorted(by_group["1"])
    d = np.array([by_group["2"][i] - by_group["1"][i] for i in ids])
    assert d.size == 10
    return d


def _log_gamma_pdf(x, shape, rate):
    return shape * math.log(rate) - gammaln(shape) + (shape - 1.0) * np.log(x) - rate * x


def _normal_sum(d, mean, precision):
    # sum_i log N(d_i | mean, 1/precision), mean and precision of shape (m,)
    n = d.size
    sq = ((d[None, :] - mean[:, None]) ** 2).sum(axis=1)
    return -0.5 * n * _LOG_2PI + 0.5 * n * np.log(precision) - 0.5 * precision * sq


def ttest_h0(d: np.ndarray | None = None) -> ModelDef:
    """d_i ~ N(0, sigma^2) with a Gamma(1e-4, 1e-4) prior on 1/sigma^2."""
    d = sleep_differences() if d is None else np.asarray(d, dtype=np.float64)

    @vectorized
    def log_q(theta):
        t = np.atleast_2d(theta)
        tau = t[:, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            out = _log_gamma_pdf(tau, PRECISION_SHAPE, PRECISION_RATE) + _normal_sum(
                d, np.zeros_like(tau), tau
            )
        return np.where(tau > 0, out, -np.inf)

    return ModelDef(
        name="ttest_h0",
        spec=ParameterSpec(("inv_sigma2",), (ParameterBound(lower=0.0),)),
        log_unnorm_posterior=log_q,
        init=np.array([1.0]),
    )


def ttest_h1(d: np.ndarray | None = None, r: float = TTEST_PRIOR_SCALE) -> ModelDef:
    """d_i ~ N(sigma delta, sigma^2), delta ~ Cauchy(0, r), 1/sigma^2 ~ Gamma(1e-4, 1e-4)."""
    d = sleep_differences() if d is None else np.asarray(d, dtype=np.float64)

    @vectorized
    def log_q(theta):
        t = np.atleast_2d(theta)
        delta, tau = t[:, 0], t[:, 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            sigma = 1.0 / np.sqrt(tau)
            log_cauchy = -math.log(math.pi * r) - np.log1p((delta / r) ** 2)
            out = (
                log_cauchy
                + _log_gamma_pdf(tau, PRECISION_SHAPE, PRECISION_RATE)
                + _normal_sum(d, sigma * delta, tau)
            )
        return np.where(tau > 0, out, -np.inf)

    return ModelDef(
        name="ttest_h1",
        spec=ParameterSpec(
            ("delta", "inv_sigma2"), (ParameterBound(), ParameterBound(lower=0.0))
        ),
        log_unnorm_posterior=log_q,
        init=np.array([0.0, 1.0]),
    )


BUILTINS: dict[str, Callable[..., ModelDef]] = {
    "gaussian-kernel": gaussian_kernel,
    "beta-binomial": beta_binomial,
    "skew-1d": skew_1d,
    "ttest-h0": ttest_h0,
    "ttest-h1": ttest_h1,
}


@dataclass(frozen=True)
class RWMRun:
    samples: SampleSet
    acceptance: np.ndarray


def rwm_sample(
    model: ModelDef,
    chains: int = 4,
    iter: int = 2000,
    warmup: int = 1000,
    step_scale: float | None = None,
    seed: int = 0,
    proposal_cov: np.ndarray | None = None,
) -> RWMRun:
    """Gaussian random-walk Metropolis on the unconstrained space.

    Every chain uses its own random substream and they advance in lockstep
    so the model density is evaluated on one (chains, p) block per step.
    ``iter`` counts all iterations, including the discarded ``warmup``.
    The step covariance is ``step_scale**2 * proposal_cov`` (identity by
    default, ``step_scale`` defaults to 2.4/sqrt(p)); there is no adaptation.
    """
    if warmup >= iter:
        raise EmptyChain(f"warmup ({warmup}) must be smaller than iter ({iter})")
    if chains < 1 or warmup < 0:
        raise InputError("need chains >= 1 and warmup >= 0")
    p = model.dim
    step_scale = 2.4 / math.sqrt(p) if step_scale is None else float(step_scale)
    if not step_scale > 0:
        raise InputError("step_scale must be positive")
    chol = np.eye(p) if proposal_cov is None else np.linalg.cholesky(np.atleast_2d(proposal_cov))
    chol = step_scale * chol

    log_q = transformed_log_density(model.log_unnorm_posterior, model.spec)
    rngs = [np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(c,))) for c in range(chains)]
    steps = np.stack([r.standard_normal((iter, p)) for r in rngs], axis=1) @ chol.T
    log_u = np.log(np.stack([r.random(iter) for r in rngs], axis=1))

    start = model.init if model.init is not None else from_unconstrained(model.spec, np.zeros(p))
    x = np.tile(to_unconstrained(model.spec, np.asarray(start, float)), (chains, 1))
    lp = evaluate(log_q, x)
    if not np.all(np.isfinite(lp)):
        raise NonFiniteDensity(f"log density at the initial point is {lp[0]}", row=0)

    keep = iter - warmup
    out = np.empty((chains, keep, p))
    accepted = np.zeros(chains)
    for t in range(iter):
        prop = x + steps[t]
        lp_prop = evaluate(log_q, prop)
        check_finite(lp_prop)
        acc = log_u[t] < lp_prop - lp
        x = np.where(acc[:, None], prop, x)
        lp = np.where(acc, lp_prop, lp)
        if t >= warmup:
            out[:, t - warmup] = x
            accepted += acc

    theta = from_unconstrained(model.spec, out.reshape(-1, p))
    labels = np.repeat(np.arange(chains), keep)
    return RWMRun(SampleSet(theta, labels, model.spec.names), accepted / keep)


def _mode_and_curvature(log_f: LogDensity, x0: np.ndarray):
    res = optimize.minimize(lambda x: -evaluate(log_f, x)[0], x0, method="BFGS")
    mode = res.x
    p = mode.size
    h = 1e-4
    hess = np.empty((p, p))
    f0 = evaluate(log_f, mode)[0]
    for i in range(p):
        for j in range(p):
            ei = np.eye(p)[i] * h
            ej = np.eye(p)[j] * h
            pts = np.array([mode + ei + ej, mode + ei - ej, mode - ei + ej, mode - ei - ej])
            v = evaluate(log_f, pts)
            hess[i, j] = (v[0] - v[1] - v[2] + v[3]) / (4 * h * h)
    return mode, hess, f0


def _mode_and_scale(log_f: LogDensity, x0: np.ndarray):
    mode, hess, f0 = _mode_and_curvature(log_f, x0)
    p = mode.size
    try:
        cov = np.linalg.inv(-hess)
        sd = np.sqrt(np.diag(cov))
        if not np.all(np.isfinite(sd)) or np.any(sd <= 0):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        sd = np.ones(p)
    return mode, sd, f0


def laplace_covariance(model: ModelDef) -> np.ndarray:
    """Inverse negative Hessian of the unconstrained log density at its mode.

    Useful as a fixed random-walk step covariance for :func:`rwm_sample`.
    """
    log_f = transformed_log_density(model.log_unnorm_posterior, model.spec)
    start = model.init if model.init is not None else from_unconstrained(model.spec, np.zeros(model.dim))
    _, hess, _ = _mode_and_curvature(log_f, to_unconstrained(model.spec, np.asarray(start, float)))
    cov = np.linalg.inv(-hess)
    return 0.5 * (cov + cov.T)


def quadrature_log_ml(model: ModelDef, grid_points: int = 801, tail_drop: float = 60.0) -> float:
    """Log integral of the Jacobian-adjusted density by a tensor trapezoid grid.

    The grid is centred on the mode of the unconstrained density and widened
    until the log integrand on the box boundary is ``tail_drop`` below the
    maximum. Only p <= 2 is supported.
    """
    p = model.dim
    if p > 2:
        raise DimensionTooHigh(f"quadrature supports p <= 2, model has p = {p}")
    log_f = transformed_log_density(model.log_unnorm_posterior, model.spec)
    start = model.init if model.init is not None else from_unconstrained(model.spec, np.zeros(p))
    mode, sd, f_mode = _mode_and_scale(log_f, to_unconstrained(model.spec, np.asarray(start, float)))

    half_width = 8.0
    for _ in range(40):
        axes = [np.linspace(m - half_width * s, m + half_width * s, grid_points) for m, s in zip(mode, sd)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.column_stack([g.ravel() for g in mesh])
        vals = evaluate(log_f, pts).reshape(mesh[0].shape)
        top = max(float(vals.max()), f_mode)
        edge = max(
            float(np.max(np.take(vals, [0, -1], axis=ax))) for ax in range(p)
        )
        if edge < top - tail_drop:
            break
        half_width *= 1.5
    else:
        raise RuntimeError("quadrature box did not capture the integrand")

    w = np.exp(vals - top)
    for ax in range(p):
        w = np.trapezoid(w, axes[ax], axis=0) if hasattr(np, "trapezoid") else np.trapz(w, axes[ax], axis=0)
    return float(top + math.log(w))
