import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import integrate, stats

from robitda.diagnostics import (
    ConstantSeriesError,
    autocorrelation,
    log_likelihood,
    log_posterior,
    mcse_batch_means,
    running_mean,
)
from robitda.linalg import Dataset, Prior
from robitda.models import ModelKind

series = arrays(float, st.integers(5, 200), elements=st.floats(-1e3, 1e3)).filter(lambda x: np.ptp(x) > 1e-3)


def ar1(phi, n, seed):
    gen = np.random.default_rng(seed)
    e = gen.standard_normal(n)
    x = np.empty(n)
    x[0] = e[0] / math.sqrt(1 - phi * phi)
    for k in range(1, n):
        x[k] = phi * x[k - 1] + e[k]
    return x


class TestAcf:
    def test_lag0_exact(self, rng):
        assert autocorrelation(rng.standard_normal(100), 5).values[0] == 1.0

    def test_white_noise(self, rng):
        x = rng.standard_normal(100_000)
        assert abs(autocorrelation(x, 5).values[5]) < 3 / math.sqrt(x.size)

    def test_ar1(self):
        assert abs(autocorrelation(ar1(0.9, 100_000, 1), 1).values[1] - 0.9) <= 0.02

    def test_constant(self):
        with pytest.raises(ConstantSeriesError):
            autocorrelation(np.ones(10), 2)

    def test_lag_range(self):
        with pytest.raises(ValueError):
            autocorrelation(np.arange(5.0), 5)

    def test_biased_definition(self):
        x = np.array([1.0, 3.0, 2.0, 5.0, 4.0])
        d = x - x.mean()
        expect = np.sum(d[:-2] * d[2:]) / np.sum(d * d)
        assert autocorrelation(x, 2).values[2] == pytest.approx(expect, rel=1e-15)

    @given(series, st.floats(0.1, 100), st.floats(-100, 100))
    def test_affine_invariance(self, x, a, b):
        k = min(5, x.size - 1)
        np.testing.assert_allclose(autocorrelation(a * x + b, k).values, autocorrelation(x, k).values, atol=1e-9)

    @given(series)
    def test_bounded(self, x):
        v = autocorrelation(x, min(10, x.size - 1)).values
        assert np.all(np.abs(v) <= 1 + 1e-12)


class TestRunningMean:
    def test_constant(self):
        np.testing.assert_array_equal(running_mean([1.0, 1.0, 1.0]).values, [1, 1, 1])

    def test_pair(self):
        np.testing.assert_array_equal(running_mean([0.0, 2.0]).values, [0, 1])

    def test_empty(self):
        with pytest.raises(ValueError):
            running_mean([])

    @given(series)
    def test_entries(self, x):
        r = running_mean(x)
        k = np.arange(1, x.size + 1)
        brute = np.array([math.fsum(x[:j]) / j for j in k])
        np.testing.assert_allclose(r.values, brute, rtol=1e-12, atol=1e-12 * np.abs(x).max())
        assert r.values[-1] == math.fsum(x) / x.size

    def test_long_trace_final(self, rng):
        x = 1e6 + rng.standard_normal(1_000_000)
        assert running_mean(x).values[-1] == pytest.approx(math.fsum(x) / x.size, rel=1e-15)


class TestMcse:
    def test_iid(self, rng):
        x = rng.standard_normal(100_000)
        se = mcse_batch_means(x, 100)
        assert 1 / 1.3 < se * math.sqrt(x.size) < 1.3

    def test_constant(self):
        assert mcse_batch_means(np.full(1000, 2.0), 10) == 0.0

    def test_ar1(self):
        phi, n = 0.9, 100_000
        # unit innovations: long-run variance 1 / (1 - phi)^2
        target = 1 / ((1 - phi) * math.sqrt(n))
        se = mcse_batch_means(ar1(phi, n, 2))
        assert 1 / 1.5 < se / target < 1.5

    def test_too_short(self):
        with pytest.raises(ValueError):
            mcse_batch_means(np.arange(10.0), 6)


class TestTraces:
    def data(self):
        X = np.array([[1.0, 0.5], [1.0, -1.2], [1.0, 2.0]])
        return Dataset(X, [1, 0, 1])

    @pytest.mark.parametrize("model", [ModelKind.robit(3), ModelKind.probit()])
    def test_zero_beta(self, model):
        d = self.data()
        assert log_likelihood(np.zeros(2), d, model) == pytest.approx(-3 * math.log(2), rel=1e-15)
        lpd = log_posterior(np.zeros(2), d, Prior.identity(2), model)
        assert lpd == pytest.approx(-3 * math.log(2) - math.log(2 * math.pi), rel=1e-14)

    def test_separation_limit(self):
        d = Dataset(np.ones((3, 1)), [1, 1, 1])
        v = log_likelihood(np.array([1e4]), d, ModelKind.robit(3))
        assert -1e-9 < v < 0

    def test_quadrature_cdf_oracle(self, rng):
        d = self.data()
        beta = rng.standard_normal(2)
        nu = 5.0
        dens = lambda t: stats.t.pdf(t, nu)
        total = 0.0
        for x, y in zip(d.X, d.y):
            F = 0.5 + integrate.quad(dens, 0, x @ beta, epsabs=1e-14, epsrel=1e-13)[0]
            total += math.log(F) if y == 1 else math.log(1 - F)
        assert log_likelihood(beta, d, ModelKind.robit(nu)) == pytest.approx(total, abs=1e-9)

    def test_identity_prior_display(self, rng):
        d = self.data()
        beta = rng.standard_normal(2)
        m = ModelKind.robit(3)
        expect = log_likelihood(beta, d, m) - math.log(2 * math.pi) - 0.5 * beta @ beta
        assert log_posterior(beta, d, Prior.identity(2), m) == pytest.approx(expect, rel=1e-14)

    def test_general_prior_density(self, rng):
        d = self.data()
        A = rng.standard_normal((2, 2))
        S = A @ A.T + np.eye(2)
        mu = rng.standard_normal(2)
        beta = rng.standard_normal(2)
        m = ModelKind.probit()
        oracle = stats.multivariate_normal(mu, np.linalg.inv(S)).logpdf(beta)
        got = log_posterior(beta, d, Prior(mu, S), m) - log_likelihood(beta, d, m)
        assert got == pytest.approx(oracle, abs=1e-10)

    def test_stack(self, rng):
        d = self.data()
        B = rng.standard_normal((7, 2))
        m = ModelKind.robit(3)
        np.testing.assert_allclose(log_likelihood(B, d, m), [log_likelihood(b, d, m) for b in B], rtol=1e-14)

    @given(st.floats(-5, 5), st.floats(0.01, 2))
    def test_monotone_in_eta(self, b, step):
        d = Dataset(np.ones((2, 1)), [1, 0])
        for model in (ModelKind.robit(3), ModelKind.probit()):
            one = Dataset(np.ones((1, 1)), [1])
            zero = Dataset(np.ones((1, 1)), [0])
            assert log_likelihood(np.array([b + step]), one, model) > log_likelihood(np.array([b]), one, model)
            assert log_likelihood(np.array([b + step]), zero, model) < log_likelihood(np.array([b]), zero, model)
        assert np.isfinite(log_likelihood(np.array([b]), d, ModelKind.robit(3)))
