#!/usr/bin/env python3
"""
Eigenvalue gap probabilities of the limiting processes.

Two routes to P(no point in a window of length x):

* Monte Carlo for any theta, averaging prod over k-subsets of
  (1 - min(x * prod V / g_k, 1)) over stick and exponent draws;
* the exact theta = 1 power series P = sum_m c_m (-x)^m, valid for
  x <= k^k, whose coefficients sum psi(G) times label-summed PD(1) moments
  over labeled hypergraphs with m edges.

Also provides the k = 1 closed forms: J0(2 sqrt x), the two-point
correlation of the one-dimensional process, and a check of the integral
equation satisfied by the gap probability.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Sequence

import mpmath
import numpy as np
import pandas as pd
from scipy import integrate
from scipy.special import j0
from tqdm import tqdm

from euler_product import psi_g
from exp_poly import pd1_label_summed_moment
from hypergraph_utils import enumerate_hypergraphs
from limit_process import default_stick_count
from permspec_errors import DomainError, TruncationTooSmall
from prime_exponents import batch_subset_log_g, k_subsets, prime_tail_bound, row_layout, sample_exponent_columns
from replicates import run_blocks
from settings import DEFAULT_PRIME_CUTOFF_INDEX, DEFAULT_PSI_TOL, DEFAULT_RESIDUAL_EPS, MPMATH_PREC

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GapEstimate:
    estimate: float
    std_error: float
    bias_bound: float
    reps: int
    r: int
    prime_cutoff: int

    def to_dict(self) -> Dict:
        return {"estimate": self.estimate, "std_error": self.std_error, "bias_bound": self.bias_bound,
                "reps": self.reps, "r": self.r, "prime_cutoff": self.prime_cutoff}


def gap_mc(k: int, theta, y1: float, y2: float, reps: int, seed: int,
           r: Optional[int] = None,
           prime_cutoff: int = DEFAULT_PRIME_CUTOFF_INDEX,
           residual_eps: float = DEFAULT_RESIDUAL_EPS,
           tolerance: Optional[float] = None,
           threads: Optional[int] = None) -> GapEstimate:
    """
    Monte Carlo estimate of the gap probability on (y1, y2).

    Args:
        k: Tuple size
        theta: Ewens parameter
        y1, y2: Window ends, y1 <= y2
        reps: Number of replicates
        seed: Master seed
        r: Sticks per replicate; defaults to the smallest r with E[residual] <= residual_eps
        prime_cutoff: Index of the last prime with sampled exponents
        residual_eps: Residual target used to pick r
        tolerance: Raise when the truncation bias bound exceeds this
        threads: Worker count

    Returns:
        GapEstimate with standard error and truncation bias bound

    Raises:
        TruncationTooSmall: the bias bound exceeds `tolerance`
    """
    x = float(y2) - float(y1)
    if x < 0:
        raise ValueError(f"need y1 <= y2, got y1={y1}, y2={y2}")
    theta = float(theta)
    if r is None:
        r = default_stick_count(theta, residual_eps, k)
    if r < k:
        raise ValueError(f"need r >= k, got r={r}, k={k}")
    if x == 0:
        return GapEstimate(1.0, 0.0, 0.0, reps, r, prime_cutoff)

    layout = row_layout(prime_cutoff)
    subsets = k_subsets(r, k)

    def block_task(block, start, stop, rng):
        size = stop - start
        fractions = rng.beta(1.0, theta, size=(size, r))
        remaining = np.cumprod(1.0 - fractions, axis=1)
        sticks = fractions * np.concatenate([np.ones((size, 1)), remaining[:, :-1]], axis=1)
        products = np.prod(sticks[:, subsets], axis=2)
        if k > 1:
            draw = sample_exponent_columns(layout, size * r, rng)
            scaled = products / np.exp(batch_subset_log_g(draw, layout, size, r, subsets))
        else:
            scaled = products
        values = np.prod(1.0 - np.minimum(x * scaled, 1.0), axis=1)
        return values, remaining[:, -1]

    results = run_blocks(block_task, reps, seed, threads=threads, desc="gap replicates")
    values = np.concatenate([v for v, _ in results])
    residuals = np.concatenate([res for _, res in results])

    bias = x * float(residuals.mean()) / math.factorial(k - 1)
    if k > 1:
        bias += prime_tail_bound(r, layout)
    if tolerance is not None and bias > tolerance:
        raise TruncationTooSmall(f"gap bias bound {bias:.3g} exceeds tolerance {tolerance:.3g}",
                                 bound=bias, tolerance=tolerance)
    std_error = float(values.std(ddof=1) / math.sqrt(reps)) if reps > 1 else float("inf")
    logger.info(f"gap_mc k={k} theta={theta} x={x}: {values.mean():.6f} +/- {std_error:.2g} "
                f"(bias <= {bias:.2g}, r={r})")
    return GapEstimate(float(values.mean()), std_error, bias, reps, r, prime_cutoff)


@dataclass(frozen=True)
class GapCoefficient:
    m: int
    value: mpmath.mpf
    error: mpmath.mpf
    exact: Optional[Fraction] = None

    def value_text(self) -> str:
        if self.exact is not None:
            return str(self.exact)
        return mpmath.nstr(self.value, 20)

    def error_text(self) -> str:
        if self.exact is not None:
            return "0"
        return mpmath.nstr(self.error, 3)


@dataclass(frozen=True)
class GapSeries:
    """Coefficients of P = sum_m c_m (-x)^m for theta = 1."""
    k: int
    coefficients: tuple

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def to_json(self) -> Dict:
        return {"k": self.k,
                "coeffs": [{"m": c.m, "value": c.value_text(), "err": c.error_text()} for c in self.coefficients]}

    def as_floats(self) -> np.ndarray:
        return np.asarray([float(c.value) for c in self.coefficients])


def gap_series(k: int, order: int, tolerance: float = DEFAULT_PSI_TOL) -> GapSeries:
    """
    Exact-procedure power series of the theta = 1 gap probability.

    c_m = sum over labeled k-uniform hypergraphs G with m edges of
    psi(G) * (label-summed PD(1) moment of the degree sequence of G).

    Args:
        k: Tuple size
        order: Highest coefficient index M
        tolerance: Per-component accuracy of psi

    Returns:
        GapSeries with c_0 .. c_M and their certified errors
    """
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    coefficients = [GapCoefficient(0, mpmath.mpf(1), mpmath.mpf(0), Fraction(1))]
    with mpmath.workprec(MPMATH_PREC):
        for m in range(1, order + 1):
            graphs = enumerate_hypergraphs(k, m)
            value = mpmath.mpf(0)
            error = mpmath.mpf(0)
            exact_sum = Fraction(0)
            all_exact = True
            for graph in tqdm(graphs, desc=f"c_{m}", disable=None, leave=False):
                moment = pd1_label_summed_moment(graph.degree_sequence())
                psi = psi_g(graph, tolerance)
                weight = mpmath.mpf(moment.numerator) / moment.denominator
                value += psi.value * weight
                error += psi.error * weight
                if psi.exact:
                    exact_sum += moment
                else:
                    all_exact = False
            exact = exact_sum if all_exact else None
            if exact is not None:
                value = mpmath.mpf(exact.numerator) / exact.denominator
            coefficients.append(GapCoefficient(m, value, error, exact))
            logger.info(f"k={k}: c_{m} = {coefficients[-1].value_text()} over {len(graphs)} hypergraphs")
    return GapSeries(k=k, coefficients=tuple(coefficients))


@dataclass(frozen=True)
class SeriesValue:
    value: float
    coefficient_error: float
    tail_estimate: float


def gap_series_eval(series: GapSeries, x: float) -> SeriesValue:
    """
    Partial sum sum_m c_m (-x)^m with its error terms.

    The tail estimate is the first omitted term for k = 1 and the last included term otherwise.

    Raises:
        DomainError: x < 0 or x > k^k
    """
    if x < 0 or x > series.k ** series.k:
        raise DomainError(f"series is valid for 0 <= x <= {series.k ** series.k}, got {x}")
    with mpmath.workprec(MPMATH_PREC):
        xm = mpmath.mpf(x)
        value = mpmath.fsum(c.value * (-xm) ** c.m for c in series.coefficients)
        coefficient_error = mpmath.fsum(c.error * xm ** c.m for c in series.coefficients)
        M = series.order
        if series.k == 1:
            tail = xm ** (M + 1) / mpmath.factorial(M + 1) ** 2
        else:
            tail = abs(series.coefficients[-1].value) * xm ** M
    return SeriesValue(float(value), float(coefficient_error), float(tail))


def bessel_gap_probability(x: float) -> float:
    """Closed form J0(2 sqrt x) of the k = 1, theta = 1 gap probability for 0 <= x <= 1."""
    if not 0 <= x <= 1:
        raise DomainError(f"closed form holds for 0 <= x <= 1, got {x}")
    return float(j0(2.0 * math.sqrt(x)))


def pair_correlation_phi(theta, x):
    """
    Two-point correlation theta/(theta+1) + (theta/x^2) sum_{1<=a<=|x|} a (1 - a/|x|)^(theta-1).

    Exact (Fraction) when theta is an integer and x is rational; infinite at
    integer |x| when theta < 1.

    Raises:
        DomainError: x == 0
    """
    if x == 0:
        raise DomainError("pair correlation is undefined at x = 0")
    exact_theta = isinstance(theta, (int, Fraction)) and Fraction(theta).denominator == 1
    if exact_theta and isinstance(x, (int, Fraction)):
        theta = int(theta)
        ax = abs(Fraction(x))
        total = Fraction(0)
        for a in range(1, math.floor(ax) + 1):
            total += a * (1 - a / ax) ** (theta - 1)
        return Fraction(theta, theta + 1) + theta / ax ** 2 * total

    theta = float(theta)
    ax = abs(float(x))
    total = 0.0
    for a in range(1, math.floor(ax) + 1):
        base = 1.0 - a / ax
        if base == 0.0 and theta < 1:
            return math.inf
        total += a * base ** (theta - 1)
    return theta / (theta + 1) + theta / ax ** 2 * total


def integral_equation_residuals(series: GapSeries, grid: Sequence[float]) -> pd.DataFrame:
    """
    Both sides of x P(x) = int_0^min(1, x) (1 - y) P(x - y) dy on a grid.

    Returns:
        DataFrame with columns x, lhs, rhs, residual
    """
    if series.k != 1:
        raise DomainError("the integral equation is for the one-dimensional process (k = 1)")
    coeffs = series.as_floats() * (-1.0) ** np.arange(len(series.coefficients))
    poly = np.polynomial.Polynomial(coeffs)
    rows = []
    for x in grid:
        if not 0 < x < 1:
            raise DomainError(f"grid points must lie in (0, 1), got {x}")
        lhs = x * poly(x)
        rhs, _ = integrate.quad(lambda y: (1 - y) * poly(x - y), 0.0, min(1.0, x),
                                epsabs=1e-14, epsrel=1e-13, limit=200)
        rows.append({"x": x, "lhs": lhs, "rhs": rhs, "residual": abs(lhs - rhs)})
    return pd.DataFrame(rows)


def check_integral_equation(series: GapSeries, grid: Sequence[float]) -> float:
    """Largest residual of the integral equation over the grid."""
    return float(integral_equation_residuals(series, grid)["residual"].max())
