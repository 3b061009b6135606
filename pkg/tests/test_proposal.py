import math

import numpy as np
import pytest
from scipy import integrate

from warpbridge.errors import DimensionMismatch, SingularCovariance, TooFewSamples
from warpbridge.proposal import (
    GaussianProposal,
    SampleSet,
    fit_proposal,
    proposal_log_density,
    sample_proposal,
    split_halves,
)


def chains_of(sizes, p=1):
    return SampleSet.from_chains([np.arange(m * p, dtype=float).reshape(m, p) + 100 * c for c, m in enumerate(sizes)])


class TestSplitHalves:
    def test_even_chains(self):
        fit, it = split_halves(chains_of([1000] * 4))
        assert fit.n == it.n == 2000
        for half in (fit, it):
            assert [idx.size for idx in half.chain_indices()] == [500] * 4

    def test_odd_chain_uses_ceiling(self):
        s = SampleSet(np.arange(5.0)[:, None], np.zeros(5), ("x",))
        with pytest.raises(TooFewSamples):
            split_halves(s.take(np.arange(3)))  # fewer than four draws overall
        s5 = SampleSet(np.arange(5.0)[:, None], np.zeros(5), ("x",))
        fit, it = _split_allow_small(s5)
        np.testing.assert_array_equal(fit.values[:, 0], [0, 1, 2])
        np.testing.assert_array_equal(it.values[:, 0], [3, 4])

    def test_single_draw_chain(self):
        with pytest.raises(TooFewSamples):
            split_halves(chains_of([10, 1]))

    def test_partition_and_no_crossing(self):
        s = chains_of([7, 4, 9])
        fit, it = split_halves(s)
        assert sorted(np.concatenate([fit.values, it.values])[:, 0]) == sorted(s.values[:, 0])
        for half in (fit, it):
            for label, idx in zip(half.chains(), half.chain_indices()):
                assert np.all(half.values[idx, 0] // 100 == label)

    def test_permuting_chains_permutes_halves(self):
        a = chains_of([6, 4])
        order = np.concatenate([np.flatnonzero(a.chain_id == 1), np.flatnonzero(a.chain_id == 0)])
        b = a.take(order)
        fa, ia = split_halves(a)
        fb, ib = split_halves(b)
        for ha, hb in ((fa, fb), (ia, ib)):
            for label in (0, 1):
                np.testing.assert_array_equal(ha.values[ha.chain_id == label], hb.values[hb.chain_id == label])

    def test_interleaved_chain_labels(self):
        s = SampleSet(np.arange(8.0)[:, None], np.array(["a", "b"] * 4), ("x",))
        fit, it = split_halves(s)
        np.testing.assert_array_equal(fit.values[:, 0], [0, 2, 1, 3])
        np.testing.assert_array_equal(it.values[:, 0], [4, 6, 5, 7])

    def test_mismatched_labels(self):
        with pytest.raises(DimensionMismatch):
            SampleSet(np.zeros((3, 1)), np.zeros(2), ("x",))


def _split_allow_small(s):
    # one 5-draw chain padded with a second chain to meet the four-draw minimum
    pad = SampleSet(np.vstack([s.values, [[99.0], [98.0]]]), np.r_[s.chain_id, [1, 1]], s.names)
    fit, it = split_halves(pad)
    return fit.take(fit.chain_id == 0), it.take(it.chain_id == 0)


class TestFitProposal:
    def test_moment_example(self):
        g = fit_proposal(np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]]))
        np.testing.assert_allclose(g.mean, [0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(g.chol @ g.chol.T, np.diag([2 / 3, 2 / 3]), atol=1e-15)

    def test_constant_draws(self):
        with pytest.raises(SingularCovariance):
            fit_proposal(np.ones((10, 2)))

    def test_one_constant_column_is_not_masked_by_jitter(self, rng):
        x = np.column_stack([rng.normal(size=50), np.full(50, 3.0)])
        with pytest.raises(SingularCovariance):
            fit_proposal(x)

    def test_too_few_draws(self, rng):
        with pytest.raises(SingularCovariance):
            fit_proposal(rng.normal(size=(3, 3)))

    def test_collinear_columns_rescued_by_jitter(self, rng):
        a = rng.normal(size=200)
        g = fit_proposal(np.column_stack([a, 2 * a, -a]))
        assert np.all(np.isfinite(g.chol)) and np.all(np.diag(g.chol) > 0)

    def test_cholesky_reproduces_covariance(self, rng):
        x = rng.normal(size=(500, 4)) @ rng.normal(size=(4, 4))
        g = fit_proposal(x)
        cov = np.cov(x, rowvar=False)
        assert np.linalg.norm(g.chol @ g.chol.T - cov) / np.linalg.norm(cov) < 1e-10
        assert np.all(np.diag(g.chol) > 0)

    def test_recovers_known_normal(self):
        # 3 standard errors, 1e5 draws from a fixed generator
        rng = np.random.default_rng(7)
        mu0 = np.array([1.0, -2.0, 0.5])
        a = np.array([[1.0, 0.0, 0.0], [0.5, 2.0, 0.0], [-0.3, 0.2, 0.7]])
        x = mu0 + rng.standard_normal((100_000, 3)) @ a.T
        g = fit_proposal(x)
        se = np.sqrt(np.diag(a @ a.T) / x.shape[0])
        assert np.all(np.abs(g.mean - mu0) < 3 * se)


class TestSampleProposal:
    def test_shape(self, rng):
        g = GaussianProposal(np.zeros(2), np.eye(2))
        x = sample_proposal(g, 3, rng)
        assert x.shape == (3, 2) and np.all(np.isfinite(x))

    def test_deterministic_given_seed(self):
        g = GaussianProposal(np.array([1.0, 2.0]), np.array([[1.0, 0.0], [0.3, 0.5]]))
        a = sample_proposal(g, 10, np.random.default_rng(3))
        b = sample_proposal(g, 10, np.random.default_rng(3))
        np.testing.assert_array_equal(a, b)

    def test_standard_mean(self):
        x = sample_proposal(GaussianProposal(np.zeros(3), np.eye(3)), 100_000, np.random.default_rng(11))
        assert np.all(np.abs(x.mean(axis=0)) < 0.02)

    def test_n2_must_be_positive(self, rng):
        with pytest.raises(ValueError):
            sample_proposal(GaussianProposal(np.zeros(1), np.eye(1)), 0, rng)


class TestProposalLogDensity:
    def test_examples(self):
        assert proposal_log_density(GaussianProposal(np.zeros(2), np.eye(2)), np.zeros(2)) == pytest.approx(
            -math.log(2 * math.pi), abs=1e-12
        )
        g = GaussianProposal(np.zeros(1), np.array([[2.0]]))
        assert proposal_log_density(g, np.array([2.0])) == pytest.approx(
            -0.5 * math.log(2 * math.pi * 4) - 0.5, abs=1e-12
        )
        assert proposal_log_density(g, np.array([2.0])) == pytest.approx(-2.1121, abs=1e-4)

    def test_mode_at_mean(self, rng):
        a = rng.normal(size=(3, 3))
        g = fit_proposal(rng.normal(size=(200, 3)) @ a)
        probes = g.mean + rng.normal(scale=2.0, size=(1000, 3))
        assert proposal_log_density(g, g.mean) >= proposal_log_density(g, probes).max()

    def test_matches_explicit_inverse(self, rng):
        for p in range(1, 6):
            a = np.tril(rng.normal(size=(p, p)))
            np.fill_diagonal(a, np.abs(np.diag(a)) + 0.5)
            g = GaussianProposal(rng.normal(size=p), a)
            x = rng.normal(size=(20, p))
            cov = a @ a.T
            d = x - g.mean
            explicit = (
                -0.5 * p * math.log(2 * math.pi)
                - 0.5 * np.linalg.slogdet(cov)[1]
                - 0.5 * np.einsum("ij,jk,ik->i", d, np.linalg.inv(cov), d)
            )
            np.testing.assert_allclose(proposal_log_density(g, x), explicit, atol=1e-8)

    def test_integrates_to_one_1d(self):
        g = GaussianProposal(np.array([0.7]), np.array([[1.3]]))
        val, _ = integrate.quad(lambda x: math.exp(proposal_log_density(g, np.array([x]))), -np.inf, np.inf)
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_integrates_to_one_2d(self):
        g = GaussianProposal(np.array([0.5, -1.0]), np.array([[1.0, 0.0], [0.6, 0.8]]))
        val, _ = integrate.dblquad(
            lambda y, x: math.exp(proposal_log_density(g, np.array([x, y]))), -12, 12, -12, 12, epsabs=1e-10
        )
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_log_norm_const(self):
        g = GaussianProposal(np.zeros(2), np.diag([2.0, 3.0]))
        assert g.log_norm_const == pytest.approx(-math.log(2 * math.pi) - math.log(6.0))
