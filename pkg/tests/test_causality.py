import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

import hetcause.causality as causality
from hetcause.causality import (
    bootstrap_endpoints,
    chi_square_survival,
    sup_statistic,
    wald_test,
    wild_bootstrap_test,
)
from hetcause.errors import NumericalError
from hetcause.rng import stream
from hetcause.weights import cross_stat_path, omega_w

HAND_RESIDUALS = np.column_stack([[1.0, -1.0, 2.0, 0.0], np.ones(4)])


class TestChiSquareSurvival:
    def test_five_percent_quantiles(self):
        assert_allclose(chi_square_survival(3.841, 1), 0.05, atol=1e-4)
        assert_allclose(chi_square_survival(5.991, 2), 0.05, atol=1e-4)

    def test_zero_statistic(self):
        for df in (1, 2, 7):
            assert chi_square_survival(0.0, df) == 1.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            chi_square_survival(-0.1, 1)

    def test_against_multiprecision_oracle(self):
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 40
        for x, df in [(0.3, 1), (2.7, 2), (11.1, 4), (25.0, 9), (0.01, 3)]:
            expected = float(
                mpmath.gammainc(df / 2.0, x / 2.0, mpmath.inf, regularized=True)
            )
            assert_allclose(chi_square_survival(x, df), expected, atol=1e-10)


class TestWaldTest:
    def test_hand_example(self):
        for weight in ("st", "w"):
            res = wald_test(HAND_RESIDUALS, 1, weight)
            assert_allclose(res.statistic, 2.0 / 3.0, atol=1e-12)
            assert_allclose(res.p_value, 0.4142, atol=1e-4)
            assert res.df == 1

    def test_orthogonal_residuals_statistic_zero(self):
        # all cross products vanish, so the endpoint is exactly zero
        res = np.column_stack([[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]])
        for weight in ("st", "w", "h"):
            out = wald_test(res, 1, weight)
            assert out.statistic == 0.0 and out.p_value == 1.0

    def test_singular_weight_reported(self):
        # collinear u2 components: omega_w has rank 1 but the endpoint is nonzero
        rng = np.random.default_rng(0)
        z = rng.standard_normal(60)
        u1 = rng.standard_normal(60) + 0.5 * z
        res = np.column_stack([u1, z, z])
        with pytest.raises(NumericalError, match="omega_w"):
            wald_test(res, 1, "w")

    def test_unknown_weight(self):
        with pytest.raises(ValueError):
            wald_test(HAND_RESIDUALS, 1, "q")

    @pytest.mark.parametrize("kappa", [1e-3, 1e3])
    @pytest.mark.parametrize("weight", ["st", "w", "h"])
    def test_scale_invariance(self, kappa, weight):
        res = np.random.default_rng(1).standard_normal((150, 3))
        base = wald_test(res, 1, weight, varhac_m=1)
        scaled = wald_test(res * kappa, 1, weight, varhac_m=1)
        assert_allclose(scaled.statistic, base.statistic, rtol=1e-10)
        assert_allclose(scaled.p_value, base.p_value, rtol=1e-10)

    def test_varhac_order_recorded(self):
        res = np.random.default_rng(2).standard_normal((200, 2))
        out = wald_test(res, 1, "h", varhac_m=2)
        assert out.m == 2
        out_aic = wald_test(res, 1, "h")
        assert out_aic.m is not None and out_aic.m >= 0

    def test_result_validation(self):
        with pytest.raises(ValueError):
            causality.TestResult(method="w", statistic=-1.0, p_value=0.5)
        with pytest.raises(ValueError):
            causality.TestResult(method="w", statistic=1.0, p_value=1.5)


class TestSupStatistic:
    def test_hand_example(self):
        assert sup_statistic(cross_stat_path(HAND_RESIDUALS, 1)) == 1.0

    def test_zero_residuals(self):
        assert sup_statistic(cross_stat_path(np.zeros((6, 2)), 1)) == 0.0

    def test_dominates_endpoint(self):
        for seed in range(5):
            res = np.random.default_rng(seed).standard_normal((80, 3))
            path = cross_stat_path(res, 1)
            assert sup_statistic(path) >= float(path.delta_T @ path.delta_T) - 1e-15


class TestWildBootstrap:
    def test_hand_example_pvalue_grid(self):
        out = wild_bootstrap_test(HAND_RESIDUALS, 1, B=3, seed=12345)
        assert out.statistic == 1.0
        assert out.p_value in {0.25, 0.5, 0.75, 1.0}
        assert out.B == 3 and out.seed == 12345

    def test_manual_replicate_enumeration(self):
        # recompute every bootstrap statistic from the documented streams
        seed, B = 2024, 7
        out = wild_bootstrap_test(HAND_RESIDUALS, 1, B=B, seed=seed)
        path = cross_stat_path(HAND_RESIDUALS, 1)
        count = 0
        for i in range(1, B + 1):
            xi = stream(seed, i).standard_normal(4)
            boot_path = np.cumsum(xi[:, None] * path.vartheta, axis=0) / 2.0
            s_i = np.max(np.sum(boot_path**2, axis=1))
            count += s_i >= out.statistic
        assert out.p_value == (1 + count) / (B + 1)

    def test_deterministic_given_seed(self):
        res = np.random.default_rng(3).standard_normal((60, 2))
        a = wild_bootstrap_test(res, 1, B=50, seed=9)
        b = wild_bootstrap_test(res, 1, B=50, seed=9)
        assert a == b
        c = wild_bootstrap_test(res, 1, B=50, seed=10)
        assert c.statistic == a.statistic  # statistic ignores the seed

    def test_pvalue_never_zero(self):
        # strong signal: every replicate should fall below the statistic
        res = np.column_stack([np.ones(100), np.ones(100)])
        out = wild_bootstrap_test(res, 1, B=19, seed=0)
        assert out.p_value == 1.0 / 20.0

    def test_degenerate_residuals(self):
        out = wild_bootstrap_test(np.zeros((10, 2)), 1, B=9, seed=0)
        assert out.degenerate and out.p_value == 1.0 and out.statistic == 0.0

    def test_bad_B(self):
        with pytest.raises(ValueError):
            wild_bootstrap_test(HAND_RESIDUALS, 1, B=0, seed=0)

    @pytest.mark.parametrize("kappa", [1e-3, 1e3])
    def test_pvalue_invariant_under_scaling(self, kappa):
        res = np.random.default_rng(4).standard_normal((120, 2))
        base = wild_bootstrap_test(res, 1, B=99, seed=7)
        scaled = wild_bootstrap_test(res * kappa, 1, B=99, seed=7)
        assert scaled.p_value == base.p_value
        assert_allclose(scaled.statistic, base.statistic * kappa**4, rtol=1e-10)

    def test_conditional_moments_of_endpoints(self):
        # conditionally on the residuals: mean 0, covariance omega_w
        res = np.random.default_rng(5).standard_normal((200, 3))
        ends = bootstrap_endpoints(res, 1, B=20000, seed=11)
        om = omega_w(res, 1)
        sd = ends.std(axis=0)
        assert np.all(np.abs(ends.mean(axis=0)) < 4.0 * sd / math.sqrt(20000))
        cov = np.cov(ends, rowvar=False)
        assert np.linalg.norm(cov - om) / np.linalg.norm(om) < 0.05

    def test_endpoints_match_test_streams(self):
        # replicate 1 endpoint reproduces from stream(seed, 1)
        res = np.random.default_rng(6).standard_normal((50, 2))
        ends = bootstrap_endpoints(res, 1, B=2, seed=3)
        path = cross_stat_path(res, 1)
        xi = stream(3, 1).standard_normal(50)
        assert_allclose(ends[0], xi @ path.vartheta / math.sqrt(50), atol=1e-14)
