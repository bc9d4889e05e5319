import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xorcount.comb import (DensityCertificate, EpsilonInputs, LogNum,
                           ParameterError, asymptotic_density, epsilon,
                           log_binomial, min_density_fstar,
                           upper_bound_threshold, variance_bound_v, w_star)
from conftest import exact_epsilon


def exact_variance(q, n, m, f):
    """Independent exact-rational evaluation of v(q)."""
    mu = Fraction(q, 1 << m)
    if q == 1:
        return mu * (1 - mu)
    return mu * (1 + exact_epsilon(n, m, q, f) * (q - 1) - mu)


class TestLogNum:
    def test_zero_and_one(self):
        assert LogNum.zero().is_zero()
        assert LogNum.one().to_linear() == 1.0
        assert (LogNum.zero() + LogNum.one()).to_linear() == 1.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            LogNum.from_linear(-1e-9)

    @given(st.floats(min_value=-690, max_value=690))
    def test_round_trip(self, lv):
        x = math.exp(lv)
        back = LogNum.from_linear(x).to_linear()
        assert abs(back - x) <= 1e-12 * x

    def test_extreme_round_trip(self):
        for x in (1e-300, 1e-30, 1.0, 1e30, 1e300):
            assert abs(LogNum.from_linear(x).to_linear() - x) <= 1e-12 * x

    @given(st.floats(min_value=1e-300, max_value=1e300),
           st.floats(min_value=1e-300, max_value=1e300),
           st.floats(min_value=1e-300, max_value=1e300))
    @settings(max_examples=200)
    def test_addition_commutative_associative(self, a, b, c):
        la, lb, lc = (LogNum.from_linear(v) for v in (a, b, c))
        assert (la + lb).log_value == (lb + la).log_value
        left = ((la + lb) + lc).log_value
        right = (la + (lb + lc)).log_value
        assert left == pytest.approx(right, rel=1e-12, abs=1e-12)

    def test_mul_div(self):
        a = LogNum.from_linear(6.0)
        b = LogNum.from_linear(1.5)
        assert (a * b).to_linear() == pytest.approx(9.0, rel=1e-12)
        assert (a / b).to_linear() == pytest.approx(4.0, rel=1e-12)
        with pytest.raises(ZeroDivisionError):
            a / LogNum.zero()

    def test_log2_value(self):
        assert LogNum.from_linear(8.0).log2_value == pytest.approx(3.0)


class TestLogBinomial:
    def test_w_zero(self):
        assert log_binomial(17, 0).log_value == 0.0

    def test_small_exact(self):
        assert log_binomial(10, 2).log_value == pytest.approx(math.log(45))

    def test_large_against_exact_bigint(self):
        want = math.log(math.comb(576, 288))
        assert log_binomial(576, 288).log_value == pytest.approx(want, rel=1e-9)

    def test_out_of_range(self):
        with pytest.raises(ParameterError):
            log_binomial(5, 6)


class TestWStar:
    def test_examples(self):
        assert w_star(10, 11) == 1  # C(10,1)=10 <= 10 < 10+45
        assert w_star(10, 2) == 0   # C(10,1)=10 > 1: empty max
        for n in (3, 8, 13):
            assert w_star(n, (1 << n) + 1) == n

    def test_bracket_property(self):
        rng = random.Random(2)
        for _ in range(200):
            n = rng.randint(1, 60)
            q = rng.randint(2, 1 << n)
            w = w_star(n, q)
            prefix = sum(math.comb(n, j) for j in range(1, w + 1))
            assert prefix <= q - 1
            if w < n:
                assert prefix + math.comb(n, w + 1) > q - 1

    def test_q_too_small(self):
        with pytest.raises(ParameterError):
            w_star(5, 1)


class TestEpsilon:
    def test_f_half_closed_form(self):
        e = epsilon(EpsilonInputs(30, 7, 1000, 0.5))
        assert e.log_value == pytest.approx(-7 * math.log(2), rel=1e-12)

    def test_f_zero_is_one(self):
        assert epsilon(EpsilonInputs(30, 7, 1000, 0.0)).log_value == 0.0

    @pytest.mark.parametrize("n,m,q,f", [
        (20, 5, 64, 0.25),
        (12, 4, 100, 0.125),
        (40, 10, 5000, 0.375),
        (8, 3, 9, 0.25),       # w* = 1, remainder active
        (25, 6, 26, 0.0625),   # q - 1 = n: exactly the weight-1 shell
    ])
    def test_against_exact_rational(self, n, m, q, f):
        got = epsilon(EpsilonInputs(n, m, q, f)).log_value
        want = math.log(exact_epsilon(n, m, q, f))
        assert got == pytest.approx(want, rel=1e-9, abs=1e-9)

    def test_nonincreasing_in_f(self):
        rng = random.Random(31)
        grid = [k / 98 for k in range(50)]  # 50 points spanning [0, 1/2]
        for _ in range(200):
            n = rng.randint(1, 40)
            m = rng.randint(1, n)
            q = rng.randint(2, 1 << n)
            prev = float("inf")
            for f in grid:
                cur = epsilon(EpsilonInputs(n, m, q, f)).log_value
                assert cur <= prev + 1e-9
                prev = cur

    def test_input_validation(self):
        with pytest.raises(ParameterError):
            EpsilonInputs(5, 6, 4, 0.5)
        with pytest.raises(ParameterError):
            EpsilonInputs(5, 2, 1, 0.5)
        with pytest.raises(ParameterError):
            EpsilonInputs(5, 2, 33, 0.5)
        with pytest.raises(ParameterError):
            EpsilonInputs(5, 2, 4, 0.7)


class TestVarianceBound:
    def test_f_half_closed_form(self):
        for q in (1, 2, 37, 4096):
            v = variance_bound_v(q, 20, 5, 0.5)
            want = (q / 32) * (1 - 1 / 32)
            assert v.to_linear() == pytest.approx(want, rel=1e-9)

    def test_q_one_singleton_variance(self):
        v = variance_bound_v(1, 10, 3, 0.2)
        assert v.to_linear() == pytest.approx((1 / 8) * (1 - 1 / 8), rel=1e-12)

    def test_against_exact_rational(self):
        got = variance_bound_v(100, 12, 4, 0.1).log_value
        want = math.log(exact_variance(100, 12, 4, 0.1))
        assert got == pytest.approx(want, rel=1e-9)

    def test_invalid_q(self):
        with pytest.raises(ParameterError):
            variance_bound_v(0, 10, 3, 0.5)


class TestUpperBoundThreshold:
    def test_f_half_closed_form(self):
        for m in range(1, 11):
            assert upper_bound_threshold(m + 4, m, 0.5) == 3 * (1 << m) - 3

    def test_matches_exhaustive_scan(self):
        from xorcount.comb import _threshold_predicate
        for n, m, f in [(10, 3, 0.2), (12, 4, 0.35), (10, 2, 0.05),
                        (14, 5, 0.5), (10, 4, 0.45)]:
            got = upper_bound_threshold(n, m, f)
            scan = next((z for z in range(1, (1 << n) + 1)
                         if _threshold_predicate(z, n, m, f)), 1 << n)
            assert got == scan

    def test_predicate_monotone(self):
        from xorcount.comb import _threshold_predicate
        rng = random.Random(17)
        for _ in range(20):
            n = rng.randint(4, 14)
            m = rng.randint(1, min(6, n))
            f = rng.uniform(0.02, 0.5)
            fired = False
            for z in range(1, 1 << min(n, 10)):
                cur = _threshold_predicate(z, n, m, f)
                assert cur or not fired  # pred(z1) implies pred(z2 > z1)
                fired = fired or cur

    def test_sentinel(self):
        # a tiny cube where the ratio never drops: fall back to 2^n
        n, m = 3, 3
        assert upper_bound_threshold(n, m, 0.5) == 1 << n


class TestMinDensityFstar:
    def test_huge_slack_pushes_f_below_half(self):
        cert = min_density_fstar(64, 6, 1 << 30, 2.25)
        assert cert.met_at_half
        assert cert.f_star < 0.5

    def test_minimality_witness(self):
        cert = min_density_fstar(204, 56, 1 << 58, 2.25)
        assert cert.condition_value.log_value <= cert.threshold_log + 1e-12
        below = epsilon(EpsilonInputs(204, 56, 1 << 58, cert.f_star - 1e-4))
        assert below.log_value > cert.threshold_log

    def test_bracket_contains_fstar(self):
        cert = min_density_fstar(76, 15, 1 << 17, 2.25)
        assert cert.bracket_lo <= cert.f_star <= cert.bracket_hi
        assert cert.bracket_hi - cert.bracket_lo <= cert.tolerance

    def test_c_property(self):
        cert = min_density_fstar(64, 6, 1 << 8, 2.25)
        assert cert.c == pytest.approx(2.0)

    def test_delta_validation(self):
        with pytest.raises(ParameterError):
            min_density_fstar(20, 4, 64, 2.0)

    def test_mu_below_one_warns(self):
        with pytest.warns(UserWarning):
            min_density_fstar(20, 6, 32, 2.25)


class TestAsymptoticDensity:
    def test_lower_at_e(self):
        assert asymptotic_density("lower", math.e, kappa=2.0) == pytest.approx(
            1.0 / (2.0 * math.e))

    def test_linear_alpha_one_coefficient(self):
        m = 1000
        want = 3.6 * math.log(m) / m
        assert asymptotic_density("linear", m, alpha=1.0) == pytest.approx(want)

    def test_sublinear_formula(self):
        m = 500
        want = 1.5 * (1 - 0.5) / (2 * 0.5) * math.log(m) ** 2 / m
        got = asymptotic_density("sublinear", m, kappa=1.5, beta=0.5)
        assert got == pytest.approx(want)

    def test_sandwich_ordering(self):
        m = 10_000
        lo = asymptotic_density("lower", m, kappa=1.1)
        hi = asymptotic_density("linear", m, alpha=0.5)
        assert lo < hi  # necessary density below sufficient density

    def test_validation(self):
        with pytest.raises(ParameterError):
            asymptotic_density("lower", 10, kappa=1.0)
        with pytest.raises(ParameterError):
            asymptotic_density("linear", 10, alpha=1.5)
        with pytest.raises(ParameterError):
            asymptotic_density("sublinear", 10, kappa=2.0, beta=1.0)
        with pytest.raises(ParameterError):
            asymptotic_density("parabolic", 10)
