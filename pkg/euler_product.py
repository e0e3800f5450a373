#!/usr/bin/env python3
"""
Local sums S_G(q) of a hypergraph and the Euler products psi(G).

S_G(q) = sum over e in N^V of q^(sum e_v) prod_edges q^(sum_{v in e} e_v - max_{v in e} e_v)
satisfies the subset recursion

    S_G = (1 - q^w(V))^-1 sum_{U strictly inside V} q^w(U) S_{G^U},
    w(U) = |U| + sum over edges meeting U of (|e & U| - 1),

where G^U keeps the edges cut down to U (multi-edges allowed), and S
factors over connected components. psi(G) = prod_p (1 - 1/p)^|V| S_G(1/p)
is evaluated as a finite product over p <= P times the exponential of a
prime-zeta series for the tail, with a certified bound on what is left.
"""

import itertools
import logging
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from hypergraph_utils import Hypergraph, canonical_form, incidence_components
from number_theory import PRIMES
from permspec_errors import ResourceLimitExceeded
from settings import (DEFAULT_PSI_TOL, INITIAL_EULER_PRIME, LOG_SERIES_TERMS, MAX_EULER_PRIME,
                      MPMATH_PREC)

logger = logging.getLogger(__name__)

Poly = List[int]


def _weight(subset: FrozenSet[int], edges: Sequence[Tuple[int, ...]]) -> int:
    weight = len(subset)
    for edge in edges:
        inside = sum(1 for v in edge if v in subset)
        if inside:
            weight += inside - 1
    return weight


def _proper_subsets(vertices: FrozenSet[int]):
    ordered = sorted(vertices)
    for size in range(len(ordered)):
        for subset in itertools.combinations(ordered, size):
            yield frozenset(subset)


def s_g_p(graph: Hypergraph, q, tail_cutoff: Optional[int] = None) -> Fraction:
    """
    S_G at a rational q in (0, 1).

    Args:
        graph: Hypergraph G
        q: Rational point, usually 1/p
        tail_cutoff: When given, sum the lattice directly with exponents <= tail_cutoff

    Returns:
        Exact value of S_G(q) (or of its truncated lattice sum)
    """
    q = Fraction(q)
    if not 0 < q < 1:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    if tail_cutoff is not None:
        return _lattice_sum(graph, q, tail_cutoff)

    edges = graph.edges
    memo: Dict[FrozenSet[int], Fraction] = {frozenset(): Fraction(1)}

    def local_sum(vertices: FrozenSet[int]) -> Fraction:
        if vertices in memo:
            return memo[vertices]
        parts = incidence_components(vertices, edges)
        if len(parts) > 1:
            value = Fraction(1)
            for part in parts:
                value *= local_sum(part)
        else:
            total = sum((q ** _weight(sub, edges) * local_sum(sub) for sub in _proper_subsets(vertices)),
                        Fraction(0))
            value = total / (1 - q ** _weight(vertices, edges))
        memo[vertices] = value
        return value

    return local_sum(graph.vertices)


def _lattice_sum(graph: Hypergraph, q, max_exponent: int):
    """Direct sum over exponent vectors with every entry <= max_exponent."""
    exact = isinstance(q, Fraction)
    total = Fraction(0) if exact else 0.0
    for exponents in itertools.product(range(max_exponent + 1), repeat=graph.num_vertices):
        power = sum(exponents)
        for edge in graph.edges:
            values = [exponents[v - 1] for v in edge]
            power += sum(values) - max(values)
        total += q ** power
    return total


def s_g_truncated_sum(graph: Hypergraph, q: float, max_exponent: int) -> float:
    """Float lattice sum of S_G with exponents <= max_exponent, vectorized over the grid."""
    r = graph.num_vertices
    grids = np.meshgrid(*[np.arange(max_exponent + 1)] * r, indexing="ij")
    power = sum(grid for grid in grids).astype(np.int64)
    for edge in graph.edges:
        stacked = np.stack([grids[v - 1] for v in edge])
        power += stacked.sum(axis=0) - stacked.max(axis=0)
    return float(np.sum(float(q) ** power))


def truncated_sum_tail_bound(graph: Hypergraph, q: float, max_exponent: int) -> float:
    """Mass of the terms with some exponent above max_exponent: <= |V| q^(E+1) / (1-q)^|V|."""
    r = graph.num_vertices
    return r * q ** (max_exponent + 1) / (1 - q) ** r


def _poly_mul(a: Poly, b: Poly) -> Poly:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_add(a: Poly, b: Poly) -> Poly:
    out = [0] * max(len(a), len(b))
    for i, x in enumerate(a):
        out[i] += x
    for i, y in enumerate(b):
        out[i] += y
    return out


def _poly_shift(a: Poly, power: int) -> Poly:
    return [0] * power + list(a)


def _one_minus_q_pow(a: int) -> Poly:
    poly = [0] * (a + 1)
    poly[0] = 1
    poly[a] = -1
    return poly


def _trim(a: Poly) -> Poly:
    while len(a) > 1 and a[-1] == 0:
        a = a[:-1]
    return a


@dataclass(frozen=True)
class RationalFunction:
    """numerator(q) / prod_a (1 - q^a), integer numerator coefficients in increasing degree."""
    numerator: Tuple[int, ...]
    denominator: Tuple[int, ...]

    def evaluate(self, q) -> Fraction:
        q = Fraction(q)
        value = sum(c * q ** i for i, c in enumerate(self.numerator))
        for a in self.denominator:
            value /= 1 - q ** a
        return value


def _multiset_union(first: Dict[int, int], second: Dict[int, int]) -> Dict[int, int]:
    merged = dict(first)
    for a, count in second.items():
        merged[a] = max(merged.get(a, 0), count)
    return merged


def _cofactor(common: Dict[int, int], own: Dict[int, int]) -> Poly:
    poly = [1]
    for a, count in common.items():
        for _ in range(count - own.get(a, 0)):
            poly = _poly_mul(poly, _one_minus_q_pow(a))
    return poly


def s_g_rational_function(graph: Hypergraph) -> RationalFunction:
    """S_G as an integer polynomial over a product of (1 - q^a) factors, by the subset recursion."""
    edges = graph.edges
    memo: Dict[FrozenSet[int], Tuple[Poly, Dict[int, int]]] = {frozenset(): ([1], {})}

    def local(vertices: FrozenSet[int]) -> Tuple[Poly, Dict[int, int]]:
        if vertices in memo:
            return memo[vertices]
        parts = incidence_components(vertices, edges)
        if len(parts) > 1:
            numerator: Poly = [1]
            denominator: Dict[int, int] = {}
            for part in parts:
                part_numerator, part_denominator = local(part)
                numerator = _poly_mul(numerator, part_numerator)
                for a, count in part_denominator.items():
                    denominator[a] = denominator.get(a, 0) + count
        else:
            terms = [(sub, local(sub)) for sub in _proper_subsets(vertices)]
            common: Dict[int, int] = {}
            for _, (_, sub_denominator) in terms:
                common = _multiset_union(common, sub_denominator)
            numerator = [0]
            for sub, (sub_numerator, sub_denominator) in terms:
                lifted = _poly_mul(sub_numerator, _cofactor(common, sub_denominator))
                numerator = _poly_add(numerator, _poly_shift(lifted, _weight(sub, edges)))
            denominator = dict(common)
            top = _weight(vertices, edges)
            denominator[top] = denominator.get(top, 0) + 1
        memo[vertices] = (_trim(numerator), denominator)
        return memo[vertices]

    numerator, denominator = local(graph.vertices)
    factors = tuple(sorted(a for a, count in denominator.items() for _ in range(count)))
    return RationalFunction(numerator=tuple(numerator), denominator=factors)


@dataclass(frozen=True)
class PsiValue:
    value: mpmath.mpf
    error: mpmath.mpf
    prime_bound: int = 0
    exact: bool = False

    def __float__(self):
        return float(self.value)


def _log_series_coefficients(num_vertices: int, rational: RationalFunction, terms: int) -> List[Fraction]:
    """
    b_j with log((1-q)^|V| S_G(q)) = sum_j b_j q^j.

    b_j = (-|V| - s_j + sum_{a in denominator, a | j} a) / j, where s_j are the
    power sums of the reciprocal roots of the numerator (Newton's identities).
    """
    coeffs = list(rational.numerator)
    degree = len(coeffs) - 1
    elementary = [(-1) ** i * coeffs[i] for i in range(degree + 1)]
    power_sums = [0] * (terms + 1)
    for j in range(1, terms + 1):
        s = (-1) ** (j - 1) * j * elementary[j] if j <= degree else 0
        for i in range(1, min(j - 1, degree) + 1):
            s += (-1) ** (i - 1) * elementary[i] * power_sums[j - i]
        power_sums[j] = s
    result = [Fraction(0)]
    for j in range(1, terms + 1):
        divisor_sum = sum(a for a in rational.denominator if j % a == 0)
        result.append(Fraction(-num_vertices - power_sums[j] + divisor_sum, j))
    return result


def roots_inside_unit_disk(coeffs: Sequence) -> bool:
    """
    Exact Schur-Cohn test: True when every root of sum_i coeffs[i] z^i has |z| < 1.

    Coefficients are in increasing degree and handled as Fractions, so the
    answer is decided without rounding.
    """
    p = _trim([Fraction(c) for c in coeffs])
    if p[-1] == 0:
        raise ValueError("zero polynomial")
    while len(p) > 1:
        a0, ad = p[0], p[-1]
        if abs(a0) >= abs(ad):
            return False
        reduced = [ad * c - a0 * r for c, r in zip(p, reversed(p))]
        p = reduced[1:]
        lead = p[-1]
        p = [c / lead for c in p]
    return True


def reciprocal_root_radius(rational: RationalFunction) -> float:
    """
    Certified bound R >= 1 with |1/rho| < R for every root rho of the numerator.

    A numerical estimate from np.roots is checked with the exact Schur-Cohn test
    on the scaled reversed numerator and doubled until the test passes.
    """
    coeffs = _trim(list(rational.numerator))
    if len(coeffs) <= 1:
        return 1.0
    moduli = np.abs(np.roots(np.asarray(coeffs, dtype=float)))
    radius = max(1.0, (float(moduli.max()) if moduli.size else 0.0) * 1.01 + 1e-9)
    d = len(coeffs) - 1
    while True:
        scale = Fraction(radius)
        scaled = [Fraction(coeffs[d - m]) * scale ** m for m in range(d + 1)]
        if roots_inside_unit_disk(scaled):
            return radius
        logger.debug(f"reciprocal root radius {radius:.6g} not certified, doubling")
        radius *= 2


def _tail_remainder_bound(prime_bound: int, terms: int, degree: int, radius: float, constant: int) -> float:
    P = float(prime_bound)
    if radius >= P:
        return float("inf")
    scale = P / (terms * (terms + 1))
    return scale * (constant * P ** -(terms + 1) / (1 - 1 / P)
                    + degree * (radius / P) ** (terms + 1) / (1 - radius / P))


def _euler_product(num_vertices: int, rational: RationalFunction, tolerance: float) -> PsiValue:
    terms = LOG_SERIES_TERMS
    b = _log_series_coefficients(num_vertices, rational, terms)
    if b[1] != 0:
        logger.warning(f"local factor is not 1 + O(q^2): b_1 = {b[1]}")
    degree = len(rational.numerator) - 1
    radius = reciprocal_root_radius(rational)
    constant = num_vertices + sum(rational.denominator)

    prime_bound = INITIAL_EULER_PRIME
    while True:
        bound = _tail_remainder_bound(prime_bound, terms, degree, radius, constant)
        if bound <= tolerance / 4:
            break
        prime_bound *= 2
        if prime_bound > MAX_EULER_PRIME:
            raise ResourceLimitExceeded(f"Euler product needs primes beyond {MAX_EULER_PRIME}")

    with mpmath.workprec(MPMATH_PREC):
        primes = [mpmath.mpf(int(p)) for p in PRIMES.up_to(prime_bound)]
        log_value = mpmath.mpf(0)
        for p in primes:
            q = 1 / p
            numerator = mpmath.polyval(list(reversed(rational.numerator)), q)
            log_value += num_vertices * mpmath.log1p(-q) + mpmath.log(numerator)
            for a in rational.denominator:
                log_value -= mpmath.log1p(-q ** a)
        for j in range(2, terms + 1):
            if b[j] == 0:
                continue
            tail = mpmath.primezeta(j) - mpmath.fsum(p ** -j for p in primes)
            log_value += mpmath.mpf(b[j].numerator) / b[j].denominator * tail
        value = mpmath.exp(log_value)
        error = value * mpmath.expm1(bound) + mpmath.mpf(2) ** (-(MPMATH_PREC - 24))
    return PsiValue(value=value, error=error, prime_bound=prime_bound)


_PSI_CACHE: Dict[Tuple, Tuple[float, PsiValue]] = {}
_PSI_LOCK = threading.Lock()


def _psi_connected(component: Hypergraph, tolerance: float) -> PsiValue:
    key = canonical_form(component)
    with _PSI_LOCK:
        cached = _PSI_CACHE.get(key)
    if cached is not None and cached[0] <= tolerance:
        return cached[1]

    rational = s_g_rational_function(component)
    trivial_denominator = rational.denominator == (1,) * component.num_vertices
    if tuple(_trim(list(rational.numerator))) == (1,) and trivial_denominator:
        result = PsiValue(value=mpmath.mpf(1), error=mpmath.mpf(0), exact=True)
    else:
        result = _euler_product(component.num_vertices, rational, tolerance)
        logger.info(f"psi{key} = {mpmath.nstr(result.value, 12)} (P={result.prime_bound}, "
                    f"err <= {mpmath.nstr(result.error, 3)})")
    with _PSI_LOCK:
        previous = _PSI_CACHE.get(key)
        if previous is None or previous[0] > tolerance:
            _PSI_CACHE[key] = (tolerance, result)
    return result


def psi_g(graph: Hypergraph, tolerance: float = DEFAULT_PSI_TOL) -> PsiValue:
    """
    psi(G) = prod_p (1 - 1/p)^|V| S_G(1/p) with a certified error bound.

    Computed per connected component and cached by isomorphism class.

    Args:
        graph: Hypergraph G
        tolerance: Target absolute error per component

    Returns:
        PsiValue; exact for components whose local factors are identically 1
    """
    if tolerance <= 0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")
    value = mpmath.mpf(1)
    upper = mpmath.mpf(1)
    exact = True
    prime_bound = 0
    for component in graph.components():
        part = _psi_connected(component, tolerance)
        value *= part.value
        upper *= part.value + part.error
        exact = exact and part.exact
        prime_bound = max(prime_bound, part.prime_bound)
    return PsiValue(value=value, error=upper - value, prime_bound=prime_bound, exact=exact)


def clear_psi_cache():
    with _PSI_LOCK:
        _PSI_CACHE.clear()
