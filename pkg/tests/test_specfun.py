import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bbeta.specfun import (
    DEFAULT_ACCURACY,
    AccuracySpec,
    ConvergenceError,
    DomainError,
    beta_fn,
    digamma,
    inc_beta_lower,
    log_beta,
    log_gamma,
    reg_inc_beta,
    reg_inc_beta_inv,
    std_normal_cdf,
    std_normal_quantile,
)

mp.mp.dps = 40

GRID = [0.5, 1.0, 2.0, 6.0]


def ulp_tol(value, floor=1e-12):
    return max(floor, 4 * np.spacing(abs(value)))


class TestLogGamma:
    def test_known_values(self):
        assert log_gamma(1.0) == 0.0
        assert log_gamma(5.0) == pytest.approx(math.log(24.0), abs=1e-12)
        assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), abs=1e-12)

    @pytest.mark.parametrize("x", [1e-3, 0.01, 0.37, 1.5, 7.25, 33.3, 171.5, 1e3, 5e4, 1e6])
    def test_against_mpmath(self, x):
        ref = float(mp.loggamma(mp.mpf(x)))
        assert abs(log_gamma(x) - ref) <= ulp_tol(ref)

    @pytest.mark.parametrize("x", [0.0, -1.0, math.inf, math.nan])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            log_gamma(x)


class TestBeta:
    def test_values(self):
        assert beta_fn(1, 1) == pytest.approx(1.0, abs=1e-15)
        assert beta_fn(2, 3) == pytest.approx(1 / 12, rel=1e-14)
        assert beta_fn(3.5, 2.2) == beta_fn(2.2, 3.5)

    def test_log_beta_matches_mpmath(self):
        for a, b in [(0.3, 7.0), (40.0, 50.0), (1e-3, 2.0)]:
            ref = float(mp.log(mp.beta(a, b)))
            assert log_beta(a, b) == pytest.approx(ref, abs=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            beta_fn(0, 1)


class TestIncompleteBeta:
    def test_examples(self):
        assert inc_beta_lower(0.0, 2.0, 3.0) == 0.0
        assert inc_beta_lower(1.0, 2.0, 3.0) == pytest.approx(1 / 12, rel=1e-12)
        assert inc_beta_lower(0.5, 1.0, 2.0) == pytest.approx(0.375, rel=1e-12)
        for x in (0.0, 0.25, 1.0):
            assert reg_inc_beta(x, 1.0, 1.0) == pytest.approx(x, abs=1e-15)
        assert reg_inc_beta(0.5, 2.0, 2.0) == pytest.approx(0.5, abs=1e-15)
        assert reg_inc_beta(0.5, 1.0, 2.0) == pytest.approx(0.75, abs=1e-15)

    @pytest.mark.parametrize("a", GRID)
    @pytest.mark.parametrize("b", GRID)
    def test_against_quadrature(self, a, b):
        for x in (0.01, 0.2, 0.5, 0.77, 0.99):
            ref = mp.quad(lambda t: t ** (a - 1) * (1 - t) ** (b - 1), [0, x])
            got = inc_beta_lower(x, a, b)
            assert abs(got - float(ref)) <= 1e-10
            assert got == pytest.approx(float(ref), rel=1e-12)

    @pytest.mark.parametrize("a,b,x", [(0.1, 0.1, 0.3), (50.0, 0.5, 0.97), (200.0, 300.0, 0.4),
                                       (1e-3, 5.0, 1e-5), (3.0, 1e4, 2e-4)])
    def test_regularized_hard_cases(self, a, b, x):
        ref = float(mp.betainc(a, b, 0, x, regularized=True))
        assert reg_inc_beta(x, a, b) == pytest.approx(ref, rel=1e-11, abs=1e-300)

    @pytest.mark.parametrize("a", GRID)
    @pytest.mark.parametrize("b", GRID)
    def test_inverse_round_trip(self, a, b):
        for p in np.arange(1, 100) / 100:
            assert reg_inc_beta(reg_inc_beta_inv(p, a, b), a, b) == pytest.approx(p, abs=1e-8)

    def test_vectorised(self):
        x = np.linspace(0, 1, 11)
        out = reg_inc_beta(x, 2.0, 3.0)
        assert out.shape == x.shape
        assert np.all(np.diff(out) >= 0)

    def test_domain(self):
        with pytest.raises(DomainError):
            reg_inc_beta(1.5, 1.0, 1.0)
        with pytest.raises(DomainError):
            reg_inc_beta(0.5, -1.0, 1.0)

    def test_iteration_cap(self):
        with pytest.raises(ConvergenceError):
            reg_inc_beta(0.5, 5000.0, 5000.0, accuracy=AccuracySpec(1e-15, 2))

    @given(st.floats(0, 1), st.floats(0.05, 50), st.floats(0.05, 50))
    def test_reflection(self, x, a, b):
        # make x + y == 1 exactly in floating point
        y = 1.0 - x
        x = 1.0 - y
        assert reg_inc_beta(x, a, b) == pytest.approx(1.0 - reg_inc_beta(y, b, a), abs=1e-12)

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0.05, 50), st.floats(0.05, 50))
    def test_monotone(self, x1, x2, a, b):
        lo, hi = sorted((x1, x2))
        assert reg_inc_beta(lo, a, b) <= reg_inc_beta(hi, a, b) + 1e-15


class TestDigamma:
    def test_values(self):
        euler = 0.5772156649015329
        assert digamma(1.0) == pytest.approx(-euler, abs=1e-12)
        assert digamma(2.0) == pytest.approx(1 - euler, abs=1e-12)
        assert digamma(0.5) == pytest.approx(-euler - 2 * math.log(2), abs=1e-12)

    @pytest.mark.parametrize("x", [1e-3, 0.1, 0.9, 3.3, 6.0, 17.5, 250.0, 1e5])
    def test_against_mpmath(self, x):
        assert digamma(x) == pytest.approx(float(mp.digamma(x)), abs=1e-10)

    @given(st.floats(0.1, 100))
    def test_recurrence(self, x):
        assert abs(digamma(x + 1) - digamma(x) - 1 / x) <= 1e-10

    def test_domain(self):
        with pytest.raises(DomainError):
            digamma(0.0)


class TestNormal:
    def test_values(self):
        assert std_normal_quantile(0.5) == 0.0
        assert std_normal_quantile(0.975) == pytest.approx(1.959963984540054, abs=1e-9)
        assert std_normal_quantile(0.025) == pytest.approx(-std_normal_quantile(0.975), abs=1e-15)
        assert std_normal_cdf(0.0) == 0.5
        assert std_normal_cdf(1.959964) == pytest.approx(0.975, abs=1e-7)

    @pytest.mark.parametrize("p", [1e-12, 1e-4, 0.3, 0.9, 1 - 1e-10])
    def test_quantile_against_mpmath(self, p):
        ref = float(mp.sqrt(2) * mp.erfinv(2 * mp.mpf(p) - 1))
        assert std_normal_quantile(p) == pytest.approx(ref, abs=1e-9)

    @given(st.floats(1e-10, 1 - 1e-10))
    def test_round_trip(self, p):
        assert std_normal_cdf(std_normal_quantile(p)) == pytest.approx(p, abs=1e-8)

    @given(st.floats(-30, 30))
    def test_cdf_symmetry(self, z):
        assert std_normal_cdf(-z) == pytest.approx(1 - std_normal_cdf(z), abs=1e-15)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 2.0])
    def test_quantile_domain(self, p):
        with pytest.raises(DomainError):
            std_normal_quantile(p)


def test_default_accuracy():
    assert DEFAULT_ACCURACY.abs_tol == 1e-12
    assert DEFAULT_ACCURACY.max_iter == 300
    with pytest.raises(ValueError):
        AccuracySpec(0.0, 10)
    with pytest.raises(ValueError):
        AccuracySpec(1e-12, 0)
