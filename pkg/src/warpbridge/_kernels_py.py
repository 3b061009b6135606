"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp as _scipy_logsumexp


def logsumexp(x: np.ndarray) -> float:
    """log(sum(exp(x))); -inf entries contribute nothing."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0 or np.all(x == -np.inf):
        return -math.inf
    return float(_scipy_logsumexp(x))


def bridge_iterate(log_l1, log_l2, log_s1, log_s2, log_init, tol, max_iter, trace):
    log_l1 = np.asarray(log_l1, dtype=np.float64)
    log_l2 = np.asarray(log_l2, dtype=np.float64)
    if len(trace) < max_iter + 1:
        raise ValueError("trace buffer shorter than max_iter + 1")
    log_n1 = math.log(log_l1.size)
    log_n2 = math.log(log_l2.size)
    shifted1 = log_s1 + log_l1
    shifted2 = log_s1 + log_l2

    r = float(log_init)
    trace[0] = r
    t = 0
    converged = False
    while t < max_iter:
        a = log_s2 + r
        num = logsumexp(log_l2 - np.logaddexp(shifted2, a)) - log_n2
        den = logsumexp(-np.logaddexp(shifted1, a)) - log_n1
        r_new = num - den
        t += 1
        trace[t] = r_new
        if not math.isfinite(r_new):
            r = r_new
            break
        if abs(r_new - r) < tol:
            r = r_new
            converged = True
            break
        r = r_new
    return r, t, converged


def autocovariance(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased (divisor n) autocovariances at lags 0..max_lag."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if max_lag >= n:
        raise ValueError("max_lag must be smaller than the series length")
    c = x - x.mean()
    return np.array([np.dot(c[: n - k], c[k:]) / n for k in range(max_lag + 1)])
