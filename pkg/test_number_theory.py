#!/usr/bin/env python3
"""
Tests for primes, exponent matrices, g_k and angle arithmetic
"""

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from number_theory import PRIMES, Angle, PrimeTable, factor_exponents, g_k, psi_alpha
from permspec_errors import PrecisionExhausted


def test_prime_table_grows_on_demand():
    """Small initial sieve still serves large indices"""
    table = PrimeTable(initial_limit=10)
    assert table.first(5).tolist() == [2, 3, 5, 7, 11]
    assert table.prime(1) == 2
    assert table.prime(1000) == 7919
    assert table.count_up_to(100) == 25


def test_factor_exponents_columns():
    """Exponent columns for a few small values"""
    assert factor_exponents([12], prime_cutoff=3).column(0) == {2: 2, 3: 1}
    matrix = factor_exponents([4, 6], prime_cutoff=2)
    assert matrix.num_columns == 2
    assert matrix.column(0) == {2: 2}
    assert matrix.column(1) == {2: 1, 3: 1}
    assert factor_exponents([1]).column(0) == {}


def test_factor_exponents_cutoff_drops_large_primes():
    matrix = factor_exponents([2 * 3 * 7 * 7919], prime_cutoff=2)
    assert matrix.column(0) == {2: 1, 3: 1}
    full = factor_exponents([2 * 3 * 7 * 7919])
    assert full.column(0) == {2: 1, 3: 1, 7: 1, 7919: 1}
    assert PRIMES.prime(1000) == 7919


def test_factor_exponents_large_prime_factor():
    """A 61-bit prime factor, out of reach of trial division by the sieve"""
    mersenne = 2 ** 61 - 1
    matrix = factor_exponents([9 * mersenne, mersenne ** 2])
    assert matrix.column(0) == {3: 2, mersenne: 1}
    assert matrix.column(1) == {mersenne: 2}
    assert g_k(matrix) == mersenne
    assert factor_exponents([9 * mersenne], prime_cutoff=2).column(0) == {3: 2}


def test_factor_exponents_rejects_zero():
    with pytest.raises(ValueError):
        factor_exponents([0])


def test_g_k_examples():
    """g_2 of full factorizations is the gcd; k = 1 gives 1"""
    assert g_k(factor_exponents([4, 6])) == 2
    assert g_k(factor_exponents([360])) == 1
    assert g_k(factor_exponents([4, 6, 10])) == 4


def test_g_k_times_lcm_is_product():
    """Randomized check of g_k * lcm = product, also under column permutation"""
    rng = np.random.default_rng(7)
    for _ in range(2000):
        k = int(rng.integers(1, 5))
        values = [int(v) for v in rng.integers(1, 10_001, size=k)]
        g = g_k(factor_exponents(values))
        assert g * math.lcm(*values) == math.prod(values)
        assert g_k(factor_exponents(values[::-1])) == g


def test_parse_rational_angles():
    assert Angle.parse("2/5").rational == Fraction(2, 5)
    assert Angle.parse("7/5").rational == Fraction(2, 5)
    assert Angle.parse("0.25").rational == Fraction(1, 4)
    assert Angle.parse("0").limit_kind() == "zero"
    assert Angle.parse("3/6").limit_kind() == "rat:2"
    assert Angle.parse("sqrt(9)").rational == 0


def test_parse_rejects_zero_denominator_and_garbage():
    with pytest.raises(ValueError):
        Angle.parse("3/0")
    with pytest.raises(ValueError):
        Angle.parse("not-an-angle")
    with pytest.raises(ValueError):
        Angle.parse("sqrt2", bits=64)


def test_parse_irrational_angles():
    """sqrt2 and frac(sqrt2) both denote sqrt(2) - 1 on the circle"""
    alpha = Angle.parse("frac(sqrt2)")
    assert not alpha.is_rational
    assert alpha.bits == 256
    assert alpha.limit_kind() == "irr"
    with mpmath.workprec(400):
        exact = mpmath.sqrt(2) - 1
        assert abs(mpmath.mpf(alpha.approx.numerator) / alpha.approx.denominator - exact) <= \
            mpmath.mpf(alpha.error_bound.numerator) / alpha.error_bound.denominator
    assert Angle.parse("sqrt2").approx == alpha.approx
    assert float(Angle.parse("golden").approx) == pytest.approx((math.sqrt(5) - 1) / 2)


def test_parse_declared_digits_limits_bits():
    alpha = Angle.parse("0.7071067811865475:50")
    assert alpha.bits == math.floor(50 * math.log2(10)) - 2
    assert float(alpha.approx) == pytest.approx(0.7071067811865475)
    with pytest.raises(ValueError):
        Angle.parse("0.70710678:20")


def test_psi_alpha_rational():
    third = Angle.parse("1/3")
    assert psi_alpha(2, third).center == Fraction(1, 3)
    assert psi_alpha(3, third).center == 1
    assert psi_alpha(3, third).is_exact


def test_psi_alpha_values_on_rational_grid():
    alpha = Angle.parse("5/12")
    for j in range(1, 40):
        value = psi_alpha(j, alpha).center
        assert 0 < value <= 1
        assert (value * 12).denominator == 1


def test_psi_alpha_irrational():
    alpha = Angle.parse("frac(sqrt2)")
    value = psi_alpha(5, alpha)
    assert float(value) == pytest.approx(1 - (5 * math.sqrt(2)) % 1, abs=1e-12)
    assert value.radius == 5 * alpha.error_bound
    assert psi_alpha(50, alpha).radius > psi_alpha(5, alpha).radius


def test_psi_alpha_precision_exhausted():
    """An approximation too close to a multiple of 1/j cannot be decided"""
    alpha = Angle(approx=Fraction(1, 2), error_bound=Fraction(1, 2 ** 129), bits=128)
    with pytest.raises(PrecisionExhausted):
        psi_alpha(2, alpha)


def test_shared_prime_table_is_consistent():
    assert PRIMES.up_to(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
