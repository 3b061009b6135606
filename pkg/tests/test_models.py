import hashlib
import math
from importlib import resources

import numpy as np
import pytest
from scipy import integrate, stats

from warpbridge.errors import DimensionTooHigh, EmptyChain, InputError, NonFiniteDensity
from warpbridge.models import (
    BUILTINS,
    ModelDef,
    SLEEP_SHA256,
    beta_binomial,
    gaussian_kernel,
    laplace_covariance,
    quadrature_log_ml,
    rwm_sample,
    skew_1d,
    sleep_differences,
    ttest_h0,
    ttest_h1,
)
from warpbridge.paramspace import ParameterSpec


def scipy_log_q_h1(delta, tau, d, r=1 / math.sqrt(2)):
    sigma = 1 / math.sqrt(tau)
    return (
        stats.cauchy.logpdf(delta, scale=r)
        + stats.gamma.logpdf(tau, 1e-4, scale=1e4)
        + stats.norm.logpdf(d, loc=sigma * delta, scale=sigma).sum()
    )


def scipy_log_q_h0(tau, d):
    return stats.gamma.logpdf(tau, 1e-4, scale=1e4) + stats.norm.logpdf(d, scale=1 / math.sqrt(tau)).sum()


class TestSleepData:
    def test_values(self):
        d = sleep_differences()
        assert d.shape == (10,)
        assert np.all(np.isfinite(d))
        np.testing.assert_allclose(d, [1.2, 2.4, 1.3, 1.3, 0.0, 1.0, 1.8, 0.8, 4.6, 1.4], atol=1e-12)
        assert d.mean() > 0

    def test_checksum(self):
        raw = resources.files("warpbridge").joinpath("data/sleep.csv").read_bytes()
        assert hashlib.sha256(raw).hexdigest() == SLEEP_SHA256


class TestEvaluators:
    def test_h1_at_reference_point(self):
        d = sleep_differences()
        value = ttest_h1().log_unnorm_posterior(np.array([[0.0, 1.0]]))[0]
        # the three terms, computed one scalar at a time
        cauchy = -math.log(math.pi / math.sqrt(2))
        assert cauchy == pytest.approx(stats.cauchy.logpdf(0.0, scale=1 / math.sqrt(2)), abs=1e-15)
        assert cauchy == pytest.approx(-0.7981563, abs=1e-7)
        gamma = 1e-4 * math.log(1e-4) - math.lgamma(1e-4) - 1e-4
        normal = sum(-0.5 * math.log(2 * math.pi) - 0.5 * x * x for x in d)
        assert value == pytest.approx(cauchy + gamma + normal, abs=1e-12)

    def test_h1_matches_scipy(self, rng):
        d = sleep_differences()
        pts = np.column_stack([rng.normal(size=20), rng.gamma(2.0, size=20)])
        ours = ttest_h1().log_unnorm_posterior(pts)
        ref = [scipy_log_q_h1(a, b, d) for a, b in pts]
        np.testing.assert_allclose(ours, ref, rtol=1e-12, atol=1e-10)

    def test_h0_matches_scipy(self, rng):
        d = sleep_differences()
        tau = rng.gamma(2.0, size=20)
        np.testing.assert_allclose(
            ttest_h0().log_unnorm_posterior(tau[:, None]), [scipy_log_q_h0(t, d) for t in tau], rtol=1e-12
        )

    def test_outside_support(self):
        assert ttest_h1().log_unnorm_posterior(np.array([[0.0, -1.0]]))[0] == -np.inf
        assert beta_binomial(10, 6).log_unnorm_posterior(np.array([[0.0]]))[0] == -np.inf

    def test_builtins_registry(self):
        assert set(BUILTINS) == {"gaussian-kernel", "beta-binomial", "skew-1d", "ttest-h0", "ttest-h1"}
        assert BUILTINS["beta-binomial"](10, 6).analytic_log_ml == pytest.approx(-math.log(11))

    def test_invalid_arguments(self):
        with pytest.raises(InputError):
            gaussian_kernel(0)
        with pytest.raises(InputError):
            beta_binomial(3, 4)


class TestQuadrature:
    @pytest.mark.parametrize(
        "model", [gaussian_kernel(1), gaussian_kernel(2), beta_binomial(10, 6), beta_binomial(5, 0), skew_1d()],
        ids=lambda m: m.name,
    )
    def test_analytic(self, model):
        assert quadrature_log_ml(model) == pytest.approx(model.analytic_log_ml, abs=1e-8)

    def test_too_high(self):
        with pytest.raises(DimensionTooHigh):
            quadrature_log_ml(gaussian_kernel(3))

    def test_ttest_bayes_factor(self):
        bf = math.exp(quadrature_log_ml(ttest_h1()) - quadrature_log_ml(ttest_h0()))
        assert bf == pytest.approx(17.26, rel=0.02)

    @pytest.mark.slow
    def test_ttest_against_scipy_integration(self):
        # independent oracle in the original parameterization
        d = sleep_differences()
        shift = 27.0
        h0, _ = integrate.quad(lambda t: math.exp(scipy_log_q_h0(t, d) + shift), 0, np.inf, limit=200)
        h1, _ = integrate.dblquad(
            lambda t, a: math.exp(scipy_log_q_h1(a, t, d) + shift), -np.inf, np.inf, 0, np.inf, epsrel=1e-10
        )
        assert quadrature_log_ml(ttest_h0()) == pytest.approx(math.log(h0) - shift, abs=1e-4)
        assert quadrature_log_ml(ttest_h1()) == pytest.approx(math.log(h1) - shift, abs=1e-4)


class TestRWM:
    def test_gaussian_kernel_mean(self):
        run = rwm_sample(gaussian_kernel(2), chains=4, iter=11_000, warmup=1000, seed=3)
        assert run.samples.n == 40_000
        assert np.all(np.abs(run.samples.values.mean(axis=0)) < 0.05)
        assert np.all((run.acceptance > 0.2) & (run.acceptance < 0.6))

    def test_split_half_stationarity(self):
        run = rwm_sample(gaussian_kernel(1), chains=4, iter=6000, warmup=1000, seed=8)
        for idx in run.samples.chain_indices():
            x = run.samples.values[idx, 0]
            a, b = x[: x.size // 2], x[x.size // 2 :]
            # batch-means standard error absorbs autocorrelation
            se = math.sqrt(sum(np.var(h.reshape(25, -1).mean(axis=1), ddof=1) / 25 for h in (a, b)))
            assert abs(a.mean() - b.mean()) < 4 * se

    def test_bounded_draws_stay_inside(self):
        run = rwm_sample(beta_binomial(10, 6), chains=2, iter=2000, warmup=200, seed=1)
        v = run.samples.values
        assert np.all((v > 0) & (v < 1))

    def test_seeded(self):
        a = rwm_sample(skew_1d(), chains=2, iter=300, warmup=100, seed=5)
        b = rwm_sample(skew_1d(), chains=2, iter=300, warmup=100, seed=5)
        np.testing.assert_array_equal(a.samples.values, b.samples.values)

    def test_chain_labels(self):
        run = rwm_sample(skew_1d(), chains=3, iter=50, warmup=10)
        np.testing.assert_array_equal(run.samples.chains(), [0, 1, 2])
        assert run.acceptance.shape == (3,)

    def test_empty_chain(self):
        with pytest.raises(EmptyChain):
            rwm_sample(gaussian_kernel(1), iter=100, warmup=100)

    def test_bad_initial_point(self):
        model = ModelDef("flat-zero", ParameterSpec.unbounded(1), lambda x: -np.inf, init=np.zeros(1))
        with pytest.raises(NonFiniteDensity):
            rwm_sample(model, iter=10, warmup=0)

    def test_laplace_covariance_of_gaussian(self):
        np.testing.assert_allclose(laplace_covariance(gaussian_kernel(2)), np.eye(2), atol=1e-5)
