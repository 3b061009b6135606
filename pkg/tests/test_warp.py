import math

import numpy as np
import pytest
from scipy import integrate

from warpbridge.density import vectorized
from warpbridge.errors import SingularCovariance
from warpbridge.estimator import compute_log_ratios, run_iterative_scheme
from warpbridge.proposal import fit_proposal, proposal_log_density, GaussianProposal, standard_normal_log_density
from warpbridge.warp import WarpSpec, fit_warp, standardize, warp_samples, warped_log_density

SQUARE = np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]])


class Counter:
    """Per-point evaluator that counts its calls."""

    def __init__(self, fn):
        self.fn = fn
        self.calls = 0

    def __call__(self, x):
        self.calls += 1
        return self.fn(x)


class TestFitWarp:
    def test_example(self):
        w = fit_warp(SQUARE)
        np.testing.assert_allclose(w.mean, 0.0, atol=1e-15)
        np.testing.assert_allclose(w.chol, np.diag([math.sqrt(2 / 3)] * 2), atol=1e-15)
        assert w.log_det_R == pytest.approx(math.log(2 / 3))

    def test_constant(self):
        with pytest.raises(SingularCovariance):
            fit_warp(np.zeros((5, 1)))

    def test_same_moments_as_proposal(self, rng):
        x = rng.normal(size=(300, 3)) @ rng.normal(size=(3, 3))
        w, g = fit_warp(x), fit_proposal(x)
        np.testing.assert_allclose(w.mean, g.mean, rtol=0, atol=1e-12)
        np.testing.assert_allclose(w.chol, g.chol, rtol=0, atol=1e-12)


class TestWarpSamples:
    def test_identity_warp_flips_signs(self, rng):
        w = WarpSpec(np.zeros(2), np.eye(2))
        xi = rng.normal(size=(200, 2))
        eta = warp_samples(w, xi, rng)
        ratio = eta / xi
        assert np.all((ratio == 1.0) | (ratio == -1.0))
        assert np.all(ratio[:, 0] == ratio[:, 1])
        assert 0 < np.sum(ratio[:, 0] < 0) < 200

    def test_centred_rows_are_zero(self, rng):
        w = WarpSpec(np.array([1.0, -2.0]), np.array([[2.0, 0.0], [0.3, 0.4]]))
        eta = warp_samples(w, np.tile(w.mean, (10, 1)), rng)
        assert np.all(eta == 0.0)

    def test_standardizes_moments(self):
        rng = np.random.default_rng(5)
        mu = np.array([3.0, -1.0])
        r = np.array([[2.0, 0.0], [1.0, 0.5]])
        n = 200_000
        xi = mu + rng.standard_normal((n, 2)) @ r.T
        eta = warp_samples(WarpSpec(mu, r), xi, rng)
        assert np.all(np.abs(eta.mean(axis=0)) < 3 / math.sqrt(n))
        np.testing.assert_allclose(np.cov(eta, rowvar=False), np.eye(2), atol=0.02)


class TestWarpedDensity:
    def test_gaussian_maps_to_standard_normal(self, rng):
        mu = np.array([0.4, -1.1])
        r = np.array([[1.5, 0.0], [-0.4, 0.3]])
        g = GaussianProposal(mu, r)
        f = warped_log_density(lambda x: proposal_log_density(g, x), WarpSpec(mu, r))
        eta = rng.normal(size=(50, 2))
        np.testing.assert_allclose(f(eta), standard_normal_log_density(eta), atol=1e-12)

        g1 = GaussianProposal(np.array([2.0]), np.array([[0.5]]))
        f1 = warped_log_density(lambda x: proposal_log_density(g1, x), WarpSpec(g1.mean, g1.chol))
        assert f1(np.zeros((1, 1)))[0] == pytest.approx(-0.9189385, abs=1e-7)

    def test_symmetric_base_unchanged(self, rng):
        base = vectorized(lambda x: -np.abs(np.atleast_2d(x)).sum(axis=1) - 0.1 * np.atleast_2d(x)[:, 0] ** 4)
        f = warped_log_density(base, WarpSpec(np.zeros(2), np.eye(2)))
        eta = rng.normal(size=(40, 2))
        np.testing.assert_allclose(f(eta), base(eta), atol=1e-14)

    def test_skewed_base_against_scalar_formula(self, rng):
        draws = np.log(rng.standard_exponential(5000))[:, None]
        w = fit_warp(draws)
        mu, r = float(w.mean[0]), float(w.chol[0, 0])
        q = lambda x: math.exp(x - math.exp(x))
        expected = math.log(r * 0.5 * (q(mu - r * 1.0) + q(mu + r * 1.0)))
        f = warped_log_density(lambda x: x[0] - math.exp(x[0]), w)
        assert f(np.array([[1.0]]))[0] == pytest.approx(expected, abs=1e-12)

    def test_symmetry_is_exact(self, rng):
        w = fit_warp(rng.gamma(2.0, size=(100, 2)))
        f = warped_log_density(vectorized(lambda x: -np.exp(np.atleast_2d(x)).sum(axis=1) + np.atleast_2d(x).sum(axis=1)), w)
        eta = rng.normal(size=(100, 2))
        np.testing.assert_array_equal(f(eta), f(-eta))

    def test_two_base_evaluations_per_point(self, rng):
        base = Counter(lambda x: x[0] - math.exp(x[0]))
        f = warped_log_density(base, WarpSpec(np.array([-0.5]), np.array([[1.2]])))
        f(rng.normal(size=(37, 1)))
        assert base.calls == 2 * 37

    def test_two_base_rows_per_point_vectorized(self, rng):
        seen = []

        @vectorized
        def base(x):
            seen.append(len(x))
            return -0.5 * (x**2).sum(axis=1)

        warped_log_density(base, WarpSpec(np.zeros(3), np.eye(3)))(rng.normal(size=(11, 3)))
        assert sum(seen) == 22

    @pytest.mark.parametrize("mu, r", [(-0.6, 1.3), (0.5, 0.7)])
    def test_constant_preserved(self, mu, r):
        # Gumbel-type kernel, Z = 1
        f = warped_log_density(lambda x: x[0] - math.exp(x[0]), WarpSpec(np.array([mu]), np.array([[r]])))
        val, _ = integrate.quad(lambda e: math.exp(f(np.array([[e]]))[0]), -60, 60, limit=200)
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_fitted_gaussian_converges_in_one_iteration(self, rng):
        # a base that is exactly the warp's Gaussian, scaled by Z = 7
        x = rng.normal(size=(400, 2)) @ np.array([[1.0, 0.2], [0.0, 0.6]])
        w = fit_warp(x)
        g = GaussianProposal(w.mean, w.chol)
        f = warped_log_density(lambda v: math.log(7.0) + proposal_log_density(g, v), w)
        eta = warp_samples(w, x, rng)
        lr = compute_log_ratios(f, standard_normal_log_density, eta, rng.normal(size=(300, 2)))
        np.testing.assert_allclose(lr.log_l1, math.log(7.0), atol=1e-12)
        est, it, conv = run_iterative_scheme(lr)
        assert it == 1 and conv
        assert est == pytest.approx(math.log(7.0), abs=1e-12)

    def test_standardize_uses_inverse_scale(self, rng):
        r = np.array([[2.0, 0.0], [1.0, 3.0]])
        z = rng.normal(size=(5, 2))
        xi = 1.0 + z @ r.T
        np.testing.assert_allclose(standardize(WarpSpec(np.ones(2), r), xi), z, atol=1e-13)
