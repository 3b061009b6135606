"""End-to-end studies run by the ``demo`` CLI subcommands."""

from __future__ import annotations

import math

import numpy as np

from .compare import bayes_factor
from .estimator import BridgeConfig, BridgeResult, bridge_sampler
from .models import gaussian_kernel, laplace_covariance, quadrature_log_ml, rwm_sample, ttest_h0, ttest_h1
from .proposal import SampleSet
from .uncertainty import error_measures


def ttest_demo(
    seed: int = 1,
    iter: int = 16000,
    warmup: int = 1000,
    chains: int = 4,
    workers: int = 1,
) -> dict:
    """Paired t-test on the sleep data: H1 (Cauchy effect size) against H0.

    Both posteriors are sampled by random-walk Metropolis with a fixed step
    covariance from the Laplace approximation, then bridged with the normal
    method. The quadrature Bayes factor is reported as an oracle.
    """
    out = {"seed": seed, "chains": chains, "iter": iter, "warmup": warmup}
    for key, model in (("h1", ttest_h1()), ("h0", ttest_h0())):
        run = rwm_sample(
            model,
            chains=chains,
            iter=iter,
            warmup=warmup,
            seed=seed,
            proposal_cov=laplace_covariance(model),
        )
        res = bridge_sampler(
            run.samples,
            model.log_unnorm_posterior,
            model.spec,
            BridgeConfig(seed=seed, workers=workers),
        )
        err = error_measures(res)
        out[key] = {
            "log_ml": float(res.log_ml[0]),
            "iterations": int(res.iterations[0]),
            "acceptance": [float(a) for a in run.acceptance],
            "re2": err.re2,
            "percentage_error": err.percentage,
            "quadrature_log_ml": quadrature_log_ml(model),
        }
        out[f"_result_{key}"] = res
    bf = bayes_factor(out.pop("_result_h1"), out.pop("_result_h0"), labels=("H1", "H0"))
    out["bf10"] = bf.bf
    out["log_bf10"] = bf.log_bf
    out["quadrature_bf10"] = math.exp(out["h1"]["quadrature_log_ml"] - out["h0"]["quadrature_log_ml"])
    return out


def gaussian_kernel_samples(p: int, n: int, chains: int = 4, seed: int = 0) -> SampleSet:
    """Independent draws from the normalized gaussian_kernel(p) posterior."""
    model = gaussian_kernel(p)
    rng = np.random.default_rng(seed)
    per_chain = -(-n // chains)
    return SampleSet.from_chains(
        [model.exact_sampler(per_chain, rng) for _ in range(chains)], model.spec.names
    )


def gaussian_kernel_demo(
    p: int = 2, n: int = 100_000, seed: int = 0, config: BridgeConfig | None = None
) -> tuple[BridgeResult, float]:
    model = gaussian_kernel(p)
    samples = gaussian_kernel_samples(p, n, seed=seed)
    config = config or BridgeConfig(seed=seed)
    res = bridge_sampler(samples, model.log_unnorm_posterior, model.spec, config)
    return res, model.analytic_log_ml
