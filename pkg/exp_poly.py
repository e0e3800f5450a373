#!/usr/bin/env python3
"""
Exact exponential polynomials sum c * x^a * exp(-b x) with rational c.

The class is closed under products and under tail integration
int_x^inf t^a e^(-b t) dt = e^(-b x) sum_{j<=a} a!/(j! b^(a-j+1)) x^j,
which is enough to evaluate the label-summed Poisson-Dirichlet(1) moments
in exact arithmetic.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Tuple

from hypergraph_utils import DegreeSequence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExpPoly:
    """Terms ((a, b), c) meaning c x^a e^(-b x), merged and sorted."""
    terms: Tuple[Tuple[Tuple[int, int], Fraction], ...] = ()

    @classmethod
    def from_dict(cls, mapping: Dict[Tuple[int, int], Fraction]) -> "ExpPoly":
        return cls(tuple(sorted((key, Fraction(c)) for key, c in mapping.items() if c != 0)))

    @classmethod
    def monomial(cls, power: int, rate: int, coeff=1) -> "ExpPoly":
        if power < 0 or rate < 0:
            raise ValueError(f"power and rate must be non-negative, got {power}, {rate}")
        return cls.from_dict({(power, rate): Fraction(coeff)})

    @classmethod
    def one(cls) -> "ExpPoly":
        return cls.monomial(0, 0)

    def as_dict(self) -> Dict[Tuple[int, int], Fraction]:
        return dict(self.terms)

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        merged = self.as_dict()
        for key, c in other.terms:
            merged[key] = merged.get(key, Fraction(0)) + c
        return ExpPoly.from_dict(merged)

    def __mul__(self, other) -> "ExpPoly":
        if not isinstance(other, ExpPoly):
            return ExpPoly.from_dict({key: c * Fraction(other) for key, c in self.terms})
        product: Dict[Tuple[int, int], Fraction] = {}
        for (a1, b1), c1 in self.terms:
            for (a2, b2), c2 in other.terms:
                key = (a1 + a2, b1 + b2)
                product[key] = product.get(key, Fraction(0)) + c1 * c2
        return ExpPoly.from_dict(product)

    __rmul__ = __mul__

    def tail_integral(self) -> "ExpPoly":
        """The function x -> int_x^inf f(t) dt."""
        result: Dict[Tuple[int, int], Fraction] = {}
        for (a, b), c in self.terms:
            if b <= 0:
                raise ValueError(f"term x^{a} e^(-{b}x) is not integrable at infinity")
            for j in range(a + 1):
                key = (j, b)
                coeff = c * Fraction(math.factorial(a), math.factorial(j) * b ** (a - j + 1))
                result[key] = result.get(key, Fraction(0)) + coeff
        return ExpPoly.from_dict(result)

    def total_integral(self) -> Fraction:
        """int_0^inf f(x) dx = sum c a!/b^(a+1)."""
        total = Fraction(0)
        for (a, b), c in self.terms:
            if b <= 0:
                raise ValueError(f"term x^{a} e^(-{b}x) is not integrable at infinity")
            total += c * Fraction(math.factorial(a), b ** (a + 1))
        return total

    def evaluate(self, x: float) -> float:
        return float(sum(float(c) * x ** a * math.exp(-b * x) for (a, b), c in self.terms))


@lru_cache(maxsize=4096)
def _label_summed_moment(degrees: Tuple[int, ...]) -> Fraction:
    inner = ExpPoly.one()
    for d in degrees[:-1]:
        inner = (inner * ExpPoly.monomial(d - 1, 1)).tail_integral()
    value = (inner * ExpPoly.monomial(degrees[-1] - 1, 1)).total_integral()
    return value / math.factorial(sum(degrees))


def pd1_label_summed_moment(d) -> Fraction:
    """
    Sum over i_1 < ... < i_v of E[L_{i_1}^d_1 ... L_{i_v}^d_v] for PD(1).

    Equals (1/D!) int_0^inf int_{x_v}^inf ... int_{x_2}^inf
    prod x_i^(d_i - 1) e^(-x_i) dx_1 ... dx_v with D = sum d_i; the inner
    integrals are taken first.

    Args:
        d: DegreeSequence or a sequence of positive integers

    Returns:
        The moment as an exact Fraction
    """
    degrees = d.degrees if isinstance(d, DegreeSequence) else DegreeSequence(tuple(int(x) for x in d)).degrees
    return _label_summed_moment(degrees)
