"""Error measures for bridge sampling estimates.

Single-run normal-method estimates get an approximate relative mean-squared
error that treats proposal draws as independent and corrects the posterior
side for autocorrelation. Multi-repetition results get order statistics of
the log estimates instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import TooFewRepetitions, UnsupportedMethod
from .estimator import BridgeResult, LogRatioVectors, sampling_fractions

MAX_AR_ORDER = 20
QUANTILE_METHOD = "linear"


@dataclass(frozen=True)
class ApproxError:
    re2: float
    cv: float
    percentage: float

    @classmethod
    def from_re2(cls, re2: float) -> ApproxError:
        cv = math.sqrt(re2)
        return cls(re2=re2, cv=cv, percentage=100.0 * cv)


@dataclass(frozen=True)
class RepetitionSummary:
    median: float
    min: float
    max: float
    iqr: float
    quantile_method: str = QUANTILE_METHOD


def _levinson_durbin(acov: np.ndarray, order: int):
    """AR coefficients and innovation variances for orders 0..order."""
    var = np.empty(order + 1)
    var[0] = acov[0]
    phi = np.zeros(0)
    coefs = [phi]
    for k in range(1, order + 1):
        if var[k - 1] <= 0:
            var[k:] = var[k - 1]
            coefs.extend([phi] * (order - k + 1))
            break
        refl = (acov[k] - phi @ acov[1:k][::-1]) / var[k - 1]
        phi = np.append(phi - refl * phi[::-1], refl)
        var[k] = var[k - 1] * (1.0 - refl * refl)
        coefs.append(phi)
    return coefs, var


def spectral_density_zero(x: np.ndarray, max_order: int = MAX_AR_ORDER) -> float:
    """Spectral density at frequency zero from a Yule-Walker AR fit.

    The order (at most ``max_order``) minimizes n log(sigma2_k) + 2k. The
    value equals n times the asymptotic variance of the sample mean.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.size
    order = min(max_order, n - 1)
    acov = kernels.autocovariance(x, order)
    if acov[0] <= 0:
        return 0.0
    coefs, var = _levinson_durbin(acov, order)
    with np.errstate(divide="ignore"):
        aic = n * np.log(np.maximum(var, 0.0)) + 2.0 * np.arange(order + 1)
    k = int(np.argmin(aic))
    return float(var[k] / (1.0 - coefs[k].sum()) ** 2)


def autocorrelation_factor(x: np.ndarray, chain_id: np.ndarray | None = None) -> float:
    """Spectral density at zero divided by the variance, averaged over chains.

    Tends to one for independent draws.
    """
    x = np.asarray(x, dtype=np.float64)
    if chain_id is None:
        groups = [x]
    else:
        chain_id = np.asarray(chain_id)
        _, first = np.unique(chain_id, return_index=True)
        groups = [x[chain_id == chain_id[i]] for i in np.sort(first)]
    factors = []
    for series in groups:
        if series.size < 3:
            continue
        var = series.var()
        factors.append(1.0 if var == 0 else spectral_density_zero(series) / var)
    return float(np.mean(factors)) if factors else 1.0


def _bridge_weights(log_ratio: np.ndarray, log_ml: float, s1: float, s2: float) -> np.ndarray:
    # 1 / (s1 * exp(log_ratio - log_ml) + s2), evaluated without overflow
    return np.exp(-np.logaddexp(math.log(s1) + (log_ratio - log_ml), math.log(s2)))


def approx_error_normal(
    lr: LogRatioVectors,
    log_ml: float,
    chain_id: np.ndarray | None = None,
) -> ApproxError:
    """Approximate relative mean-squared error of a single bridge estimate.

    Parameters
    ----------
    lr : LogRatioVectors
        Ratios from the estimate (posterior half first, proposal draws second).
    log_ml : float
        The converged log estimate.
    chain_id : array, optional
        Chain label of each posterior-half draw, for the per-chain
        autocorrelation correction.
    """
    s1, s2 = sampling_fractions(lr.n1, lr.n2)
    # proposal side: numerator integrand, independent draws
    f2 = np.exp(lr.log_l2 - log_ml) * _bridge_weights(lr.log_l2, log_ml, s1, s2)
    # posterior side: denominator integrand, possibly autocorrelated
    f1 = _bridge_weights(lr.log_l1, log_ml, s1, s2)
    rho = autocorrelation_factor(f1, chain_id)
    term_prop = f2.var(ddof=1) / (lr.n2 * f2.mean() ** 2)
    term_post = rho * f1.var(ddof=1) / (lr.n1 * f1.mean() ** 2)
    return ApproxError.from_re2(float(term_prop + term_post))


def repetition_summary(result: BridgeResult | np.ndarray) -> RepetitionSummary:
    values = np.asarray(result.log_ml if isinstance(result, BridgeResult) else result, float)
    if values.size < 2:
        raise TooFewRepetitions(f"need at least 2 repetitions, got {values.size}")
    q25, q50, q75 = np.percentile(values, [25, 50, 75], method=QUANTILE_METHOD)
    return RepetitionSummary(
        median=float(q50), min=float(values.min()), max=float(values.max()), iqr=float(q75 - q25)
    )


def error_measures(result: BridgeResult) -> ApproxError | RepetitionSummary:
    """Approximate error for single normal-method runs, else a repetition summary."""
    if result.repetitions > 1:
        return repetition_summary(result)
    if result.method != "normal":
        raise UnsupportedMethod(
            f"approximate errors are unreliable for method {result.method!r} with one "
            "repetition; rerun with repetitions > 1"
        )
    if not result.log_ratios:
        raise UnsupportedMethod("result carries no log ratios (was it loaded from a file?)")
    return approx_error_normal(result.log_ratios[0], float(result.log_ml[0]), result.iterate_chain_id)
