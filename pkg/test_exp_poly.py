#!/usr/bin/env python3
"""
Tests for exact exponential polynomials and PD(1) label-summed moments
"""

import math
from fractions import Fraction

import pytest
from scipy import integrate

from exp_poly import ExpPoly, pd1_label_summed_moment
from hypergraph_utils import DegreeSequence


def test_tail_integral_of_x_exp():
    """int_x^inf t e^-t dt = (x + 1) e^-x"""
    tail = ExpPoly.monomial(1, 1).tail_integral()
    assert tail.as_dict() == {(0, 1): 1, (1, 1): 1}


def test_total_integral_gamma():
    assert ExpPoly.monomial(3, 2).total_integral() == Fraction(6, 16)
    with pytest.raises(ValueError):
        ExpPoly.one().total_integral()


def test_products_and_sums():
    f = ExpPoly.monomial(1, 1) + ExpPoly.monomial(0, 2, 3)
    g = f * ExpPoly.monomial(2, 1)
    assert g.as_dict() == {(3, 2): 1, (2, 3): 3}
    assert (2 * f).as_dict() == {(1, 1): 2, (0, 2): 6}
    assert (f + f * -1).terms == ()


def test_evaluate_matches_quadrature():
    f = (ExpPoly.monomial(2, 1) * ExpPoly.monomial(1, 2)).tail_integral()
    value, _ = integrate.quad(lambda t: t ** 3 * math.exp(-3 * t), 0.7, math.inf)
    assert f.evaluate(0.7) == pytest.approx(value, rel=1e-10)


def test_k2_second_order_moments():
    assert pd1_label_summed_moment([2, 1, 1]) == Fraction(11, 864)
    assert pd1_label_summed_moment([1, 2, 1]) == Fraction(5, 864)
    assert pd1_label_summed_moment([1, 1, 2]) == Fraction(1, 432)
    assert pd1_label_summed_moment([1, 1, 1, 1]) == Fraction(1, 576)


def test_all_ones_moments():
    for m in range(1, 9):
        assert pd1_label_summed_moment(DegreeSequence((1,) * m)) == Fraction(1, math.factorial(m) ** 2)


def test_single_part_moment():
    """sum_i E[L_i^d] = 1/d for PD(1)"""
    for d in range(1, 6):
        assert pd1_label_summed_moment([d]) == Fraction(1, d)


def test_moment_rejects_zero_degree():
    with pytest.raises(ValueError):
        pd1_label_summed_moment([1, 0])
