import math

import numpy as np
import pytest
from scipy import stats

from robitda.datasets import trace_instance, zero_design
from robitda.linalg import Dataset, DimensionError, Prior
from robitda.special import DomainError, RngStream
from robitda.verify import (
    QUAD_FLOOR,
    SuiteConfig,
    TraceInstanceSpec,
    check_mills_bound,
    check_omega_spectrum,
    check_step4_bound,
    kappa,
    kappa_m,
    kernel_diag_mc,
    mills_m_values,
    random_omega_instance,
    run_suite,
    trace_mc,
)

T_GRID = np.geomspace(1e-3, 1e2, 200)


class TestConstants:
    def test_kappa_three(self):
        assert kappa(3.0) == pytest.approx(2 / math.pi, rel=1e-14)

    def test_kappa_m_oracle(self):
        # Gamma(5/2) = 3 sqrt(pi) / 4, so kappa_m(4, 2) = (3/4)(2)(2) / 2
        assert kappa_m(4.0, 2.0) == pytest.approx(1.5, rel=1e-14)

    def test_kappa_is_m_one(self):
        for nu in (2.1, 5.0, 30.0):
            assert kappa(nu) == pytest.approx(kappa_m(nu, 1.0), rel=1e-14)

    @pytest.mark.parametrize("nu,m", [(2.0, 1.0), (3.0, 3.0), (3.0, 0.0)])
    def test_domain(self, nu, m):
        with pytest.raises(DomainError):
            kappa_m(nu, m) if m != 1.0 else kappa(nu)

    def test_m_values(self):
        assert mills_m_values(3.0) == (0.75, 1.5, 1.0)
        assert mills_m_values(2.1) == pytest.approx((0.525, 1.05, 1.0))


class TestMills:
    def test_example_holds(self):
        general, simple = check_mills_bound(2.5, 0.5, T_GRID)
        assert general.passed and simple.passed
        assert general.worst_margin >= 0 and simple.worst_margin >= 0

    def test_falsified(self):
        general, simple = check_mills_bound(2.5, 0.5, T_GRID, kappa_scale=10.0)
        assert not general.passed and not simple.passed
        assert general.worst_margin < -1

    @pytest.mark.parametrize("nu", [2.1, 3.0, 10.0, 30.0])
    def test_nus(self, nu):
        for m in mills_m_values(nu):
            assert all(r.passed for r in check_mills_bound(nu, m, T_GRID))

    def test_direct_oracle(self):
        # margin recomputed from scipy's survival function at a moderate t
        nu, t = 3.0, np.array([1.7])
        simple = check_mills_bound(nu, 1.0, t)[1]
        q = 1 / stats.t.sf(t[0], nu)
        b = (t[0] ** 2 + nu) ** (nu / 2) / kappa(nu)
        assert simple.worst_margin == pytest.approx(1 - q / b, rel=1e-10)

    def test_bad_grid(self):
        with pytest.raises(DomainError):
            check_mills_bound(3.0, 1.0, [0.0, 1.0])


class TestStep4:
    def test_theta_at_minus_c(self, rng):
        W = rng.standard_normal((4, 2))
        c = rng.standard_normal(2)
        r = check_step4_bound(W, c, -c[None], 3.0)
        assert r.passed
        # lhs = n log 2 and rhs = n log(2 + nu^(nu/2) / kappa)
        expect = 1 - (2 / (2 + 3**1.5 / kappa(3.0))) ** 4
        assert r.details["worst_product_margin"] == pytest.approx(expect, rel=1e-12)

    def test_random(self, rng):
        W = rng.standard_normal((4, 2))
        c = rng.standard_normal(2)
        theta = 3 * rng.standard_normal((500, 2))
        assert check_step4_bound(W, c, theta, 3.0).passed
        y = np.array([1, 0, 0, 1])
        assert check_step4_bound(W, c, theta, 3.0, y=y).passed

    def test_wide(self, rng):
        W = rng.standard_normal((2, 5))
        assert check_step4_bound(W, np.zeros(5), rng.standard_normal((300, 5)), 2.5).passed

    def test_one_row_equality(self, rng):
        W = rng.standard_normal((1, 3))
        r = check_step4_bound(W, np.zeros(3), 5 * rng.standard_normal((200, 3)), 3.0)
        assert r.passed and abs(r.details["worst_cauchy_schwarz_margin"]) < 1e-12

    def test_dims(self):
        with pytest.raises(DimensionError):
            check_step4_bound(np.ones((2, 2)), np.zeros(3), np.zeros((1, 2)), 3.0)


class TestOmegaCheck:
    def test_zero_design(self):
        r = check_omega_spectrum(np.zeros((3, 2)), np.ones(3))
        assert r.passed and r.details["unit_eigenvalues"] == 2

    def test_random(self):
        gen = np.random.default_rng(4)
        for wide in (False, True):
            for _ in range(10):
                W, lam = random_omega_instance(gen, wide)
                r = check_omega_spectrum(W, lam)
                assert r.passed, r.details
                if wide:
                    assert r.details["unit_eigenvalues"] == W.shape[1] - W.shape[0]


class TestKernelDiag:
    def test_zero_design_exact(self):
        # with X = 0 the beta conditional is the prior for every (z, lambda)
        d, prior = zero_design(), Prior.identity(1)
        for b in np.linspace(-3, 3, 11):
            est, se = kernel_diag_mc(np.array([b]), d, prior, 3.0, 200, RngStream(0))
            assert est == pytest.approx(stats.norm.pdf(b), rel=1e-12) and se < 1e-12

    def test_se_scaling(self):
        d, prior = trace_instance(2, 1), Prior.identity(1)
        _, se1 = kernel_diag_mc(np.array([0.4]), d, prior, 3.0, 2000, RngStream(1))
        _, se2 = kernel_diag_mc(np.array([0.4]), d, prior, 3.0, 8000, RngStream(2))
        assert 1.6 < se1 / se2 < 2.5

    def test_probit(self):
        est, se = kernel_diag_mc(np.array([0.2]), trace_instance(2, 1), Prior.identity(1), None, 500, RngStream(3))
        assert est > 0 and se > 0

    def test_min_draws(self):
        with pytest.raises(ValueError):
            kernel_diag_mc(np.zeros(1), zero_design(), Prior.identity(1), 3.0, 50, RngStream(0))


class TestTrace:
    def test_zero_design_is_one(self):
        est = trace_mc(zero_design(), Prior.identity(1), 3.0, 64, 200, RngStream(0))
        assert abs(est.estimate - 1) <= 3 * est.se + QUAD_FLOOR

    def test_p_three_rejected(self):
        d = Dataset(np.zeros((2, 3)), [0, 1])
        with pytest.raises(DimensionError):
            trace_mc(d, Prior.identity(3), 3.0, 16, 200, RngStream(0))

    def test_positive_finite(self):
        est = trace_mc(trace_instance(2, 1), Prior.identity(1), 3.0, 64, 300, RngStream(5))
        assert est.estimate > 1 and math.isfinite(est.estimate) and est.se > 0

    def test_spec_parse(self):
        s = TraceInstanceSpec.parse("n=3,p=2,nu=5")
        assert (s.n, s.p, s.nu) == (3, 2, 5.0)
        with pytest.raises(ValueError):
            TraceInstanceSpec.parse("n=9,p=1")
        with pytest.raises(ValueError):
            TraceInstanceSpec.parse("n=2,p=1,nu=2")


def test_small_suite_passes():
    cfg = SuiteConfig(grid_points=50, omega_instances=10, step4_instances=4, theta_samples=100,
                      outer_nodes=64, inner_draws=300)
    rep = run_suite(cfg)
    assert rep.passed, rep.failures()
    assert rep.to_dict()["passed"]


def test_small_suite_falsified():
    cfg = SuiteConfig(grid_points=50, omega_instances=2, step4_instances=1, theta_samples=10,
                      outer_nodes=64, inner_draws=300, falsify="mills")
    rep = run_suite(cfg)
    assert not rep.passed
    assert [f["name"] for f in rep.failures()] == ["mills_bounds"]
