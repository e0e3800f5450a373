#!/usr/bin/env python3
"""
Simulation of the limiting eigenangle point processes.

Sticks come from GEM(theta) stick breaking. Every k-subset of sticks with
product P and correction G = g_k(X) contributes the lattice
(q + U) G / P, q in Z, with multiplicity k! G. U is uniform on [0, 1] for
irrational centres, a unit-group draw on {1/t, ..., 1} for a rational centre
s/t, and 1 at the centre 0. Only finitely many sticks and primes are used,
and every sample reports the bias bounds of that truncation.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import gamma, gammaln

from number_theory import PRIMES, ExponentMatrix, factor_exponents, g_k
from permspec_errors import DomainError, TruncationTooSmall
from prime_exponents import (ExponentDraw, PrimeRowLayout, batch_subset_log_g, k_subsets, merge_draws,
                             prime_tail_bound, row_layout, sample_exponent_columns)
from replicates import run_replicates
from settings import DEFAULT_PRIME_CUTOFF_INDEX, DEFAULT_RESIDUAL_EPS

logger = logging.getLogger(__name__)

CANDIDATE_SLACK = 1e-9


@dataclass(frozen=True)
class StickSample:
    """GEM(theta) sticks in order of generation plus the unbroken residual."""
    sticks: np.ndarray
    residual: float
    theta: float

    @property
    def r(self) -> int:
        return len(self.sticks)

    def sorted_sticks(self) -> np.ndarray:
        """Decreasing rearrangement (Poisson-Dirichlet order)."""
        return np.sort(self.sticks)[::-1]

    def largest(self) -> float:
        return float(self.sticks.max())


def _break_sticks(fractions: np.ndarray, theta: float) -> StickSample:
    remaining = np.cumprod(1.0 - fractions)
    sticks = fractions * np.concatenate([[1.0], remaining[:-1]])
    return StickSample(sticks=sticks, residual=float(remaining[-1]), theta=theta)


def sample_gem(theta, r: int, rng: np.random.Generator) -> StickSample:
    """
    First r GEM(theta) sticks V_j = U_j prod_{i<j} (1 - U_i), U_j ~ Beta(1, theta).

    Args:
        theta: Positive Ewens parameter
        r: Number of sticks
        rng: Random stream

    Returns:
        StickSample with residual prod (1 - U_i)
    """
    theta = float(theta)
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    if r < 1:
        raise ValueError(f"need at least one stick, got r={r}")
    return _break_sticks(rng.beta(1.0, theta, size=r), theta)


def sample_gem_until(theta, eps: float, rng: np.random.Generator, min_sticks: int = 1,
                     chunk: int = 16) -> StickSample:
    """Break sticks until the residual mass is below eps, keeping at least `min_sticks`."""
    theta = float(theta)
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    fractions = rng.beta(1.0, theta, size=max(chunk, min_sticks))
    while True:
        remaining = np.cumprod(1.0 - fractions)
        below = np.flatnonzero(remaining < eps)
        if len(below):
            r = max(int(below[0]) + 1, min_sticks)
            return _break_sticks(fractions[:r], theta)
        fractions = np.concatenate([fractions, rng.beta(1.0, theta, size=chunk)])


def default_stick_count(theta, eps: float = DEFAULT_RESIDUAL_EPS, k: int = 1) -> int:
    """Smallest r >= k with expected residual (theta/(theta+1))^r <= eps."""
    theta = float(theta)
    r = math.ceil(math.log(eps) / math.log(theta / (theta + 1.0)))
    return max(r, k)


def p_theta_unit_interval(x, theta) -> float:
    """Density of the limiting sum on (0, 1]: exp(-gamma theta) x^(theta-1) / Gamma(theta)."""
    theta = float(theta)
    if not 0 < x <= 1:
        raise DomainError(f"x={x} outside (0, 1]")
    return math.exp(-np.euler_gamma * theta) * x ** (theta - 1) / gamma(theta)


def pd_largest_density(x, theta) -> float:
    """
    Density of the largest Poisson-Dirichlet part at x in (1/2, 1).

    Evaluates e^(gamma theta) theta Gamma(theta) x^(theta-2) p_theta((1-x)/x),
    which equals theta (1-x)^(theta-1) / x on this range.
    """
    theta = float(theta)
    if not 0.5 < x < 1:
        raise DomainError(f"largest-part density is closed form only on (1/2, 1), got x={x}")
    return (math.exp(np.euler_gamma * theta) * theta * gamma(theta) * x ** (theta - 2)
            * p_theta_unit_interval((1 - x) / x, theta))


def limit_intensity(k: int, theta) -> float:
    """Mean point density theta^k Gamma(theta) / Gamma(theta + k); 1/k! at theta = 1."""
    theta = float(theta)
    return math.exp(k * math.log(theta) + gammaln(theta) - gammaln(theta + k))


@dataclass(frozen=True)
class LimitKind:
    """Rationality class of the window centre: 'irr', 'rat' with denominator t, or 'zero'."""
    name: str
    t: int = 1

    @classmethod
    def parse(cls, text: str) -> "LimitKind":
        text = text.strip().lower()
        if text in ("irr", "irrational"):
            return cls("irr")
        if text == "zero":
            return cls("zero")
        if text.startswith("rat:"):
            t = int(text[4:])
            if t < 1:
                raise ValueError(f"rational kind needs t >= 1, got {t}")
            return cls("zero") if t == 1 else cls("rat", t)
        raise ValueError(f"unknown limit kind {text!r}; expected irr, rat:t or zero")

    @property
    def has_atom(self) -> bool:
        return self.name != "irr"

    def __str__(self):
        return f"rat:{self.t}" if self.name == "rat" else self.name


class PrimeExponentArray:
    """
    Columns of the geometric exponent array for one replicate.

    Columns are drawn in index order, in batches, and kept; rows past the
    prime cutoff are zero.
    """

    def __init__(self, rng: np.random.Generator, layout: PrimeRowLayout = None):
        self.rng = rng
        self.layout = layout or row_layout()
        self._draw = None
        self._columns: Dict[int, Dict[int, int]] = {}

    @property
    def cutoff(self) -> int:
        return self.layout.cutoff

    @property
    def num_columns(self) -> int:
        return 0 if self._draw is None else self._draw.num_columns

    def ensure_columns(self, count: int):
        missing = count - self.num_columns
        if missing <= 0:
            return
        batch = sample_exponent_columns(self.layout, missing, self.rng)
        self._draw = batch if self._draw is None else merge_draws(self._draw, batch)

    def column(self, i: int) -> Dict[int, int]:
        """Nonzero exponents of column i as {prime: exponent}."""
        self.ensure_columns(i + 1)
        if i not in self._columns:
            draw = self._draw
            column = {int(p): int(e) for p, e in zip(self.layout.dense_primes, draw.dense[i]) if e}
            for p, e in zip(draw.sparse_prime[draw.sparse_column == i], draw.sparse_exponent[draw.sparse_column == i]):
                column[int(p)] = int(e)
            self._columns[i] = column
        return self._columns[i]

    def entry(self, m: int, i: int) -> int:
        """X[m, i] with 1-based prime index m."""
        if m > self.cutoff:
            return 0
        return self.column(i).get(int(self.layout.primes[m - 1]), 0)

    def exponent_matrix(self, indices: Sequence[int]) -> ExponentMatrix:
        return ExponentMatrix(columns=tuple(tuple(sorted(self.column(int(i)).items())) for i in indices),
                              prime_cutoff=self.cutoff)

    def subset_g(self, subset: Sequence[int]) -> int:
        return g_k(self.exponent_matrix(subset))

    def subset_log_g(self, subsets: np.ndarray) -> np.ndarray:
        r = int(subsets.max()) + 1 if subsets.size else 0
        self.ensure_columns(r)
        if r == 0:
            return np.zeros(len(subsets))
        view = self._draw
        if view.num_columns != r:
            keep = view.sparse_column < r
            view = ExponentDraw(dense=view.dense[:r], sparse_column=view.sparse_column[keep],
                              sparse_prime=view.sparse_prime[keep], sparse_exponent=view.sparse_exponent[keep])
        return batch_subset_log_g(view, self.layout, 1, r, subsets)[0]


@dataclass(frozen=True)
class TruncationReport:
    r: int
    prime_cutoff: int
    prime_cutoff_value: int
    residual: float
    omitted_intensity_bound: float
    prime_tail_bound: float

    @property
    def total_bound(self) -> float:
        return self.omitted_intensity_bound + self.prime_tail_bound

    def to_dict(self) -> Dict:
        return {"r": self.r, "prime_cutoff": self.prime_cutoff, "prime_cutoff_value": self.prime_cutoff_value,
                "residual": self.residual, "omitted_intensity_bound": self.omitted_intensity_bound,
                "prime_tail_bound": self.prime_tail_bound}


@dataclass(frozen=True)
class LimitPoint:
    position: float
    multiplicity: int
    subset: Tuple[int, ...]


@dataclass(frozen=True)
class LimitWindowSample:
    """
    Points of one limit-process realization inside a closed window.

    For atom kinds the infinite mass at 0 is not listed; `atom_hits` counts
    the enumerated lattices that pass through 0.
    """
    points: Tuple[LimitPoint, ...]
    window: Tuple[float, float]
    kind: LimitKind
    truncation: TruncationReport
    atom_at_zero: bool = False
    atom_hits: int = 0

    def count(self) -> int:
        return sum(point.multiplicity for point in self.points)

    def positions(self) -> np.ndarray:
        return np.asarray([point.position for point in self.points], dtype=float)

    def multiplicities(self) -> np.ndarray:
        return np.asarray([point.multiplicity for point in self.points], dtype=np.int64)


def _largest_prime_index(t: int) -> int:
    """Index M of the largest prime factor of t (0 for t = 1)."""
    factors = factor_exponents([t]).column(0)
    if not factors:
        return 0
    return PRIMES.count_up_to(max(factors))


def _rational_offset(exponents: PrimeExponentArray, subset: Sequence[int], units: np.ndarray,
                     t: int, small_primes: Sequence[int]) -> Fraction:
    """
    U = V/t with V = prod_{m<=M} p_m^(max X) * (excess over larger primes)^-1 * prod U_i (mod t).

    V = 0 is identified with t, so U lies in {1/t, ..., 1}.
    """
    columns = [exponents.column(int(i)) for i in subset]
    small = set(small_primes)
    value = 1
    large_excess = 1
    for p in {p for column in columns for p in column}:
        exps = [column.get(p, 0) for column in columns]
        if p in small:
            value = value * pow(p, max(exps), t) % t
        else:
            large_excess = large_excess * pow(p, sum(exps) - max(exps), t) % t
    value = value * pow(large_excess, -1, t) % t
    for i in subset:
        value = value * int(units[int(i)]) % t
    return Fraction(value if value else t, t)


def simulate_limit_window(k: int, theta, kind, window: Tuple[float, float], rng: np.random.Generator,
                          r: Optional[int] = None,
                          prime_cutoff: int = DEFAULT_PRIME_CUTOFF_INDEX,
                          residual_eps: float = DEFAULT_RESIDUAL_EPS,
                          tolerance: Optional[float] = None) -> LimitWindowSample:
    """
    One realization of the k-fold limit process restricted to [w1, w2].

    Args:
        k: Tuple size of the representation
        theta: Ewens parameter
        kind: LimitKind or its text form ('irr', 'rat:t', 'zero')
        window: Closed window (w1, w2)
        rng: Random stream
        r: Number of sticks; None breaks sticks until the residual is below residual_eps
        prime_cutoff: Index L of the last prime with sampled exponents
        residual_eps: Residual stick mass target when r is None
        tolerance: Raise when the truncation bias bound exceeds this

    Returns:
        LimitWindowSample with its TruncationReport

    Raises:
        TruncationTooSmall: the bias bound exceeds `tolerance`
    """
    if isinstance(kind, str):
        kind = LimitKind.parse(kind)
    w1, w2 = float(window[0]), float(window[1])
    if not w1 < w2:
        raise ValueError(f"window must satisfy w1 < w2, got [{w1}, {w2}]")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")

    layout = row_layout(prime_cutoff)
    small_primes: List[int] = []
    if kind.name == "rat":
        largest_index = _largest_prime_index(kind.t)
        if largest_index > prime_cutoff:
            raise ValueError(f"prime cutoff {prime_cutoff} does not reach the prime factors of t={kind.t}")
        small_primes = [int(p) for p in layout.primes[:largest_index]]

    if r is None:
        sticks = sample_gem_until(theta, residual_eps, rng, min_sticks=k)
    else:
        if r < k:
            raise ValueError(f"need r >= k, got r={r}, k={k}")
        sticks = sample_gem(theta, r, rng)
    r = sticks.r

    subsets = k_subsets(r, k)
    products = np.prod(sticks.sticks[subsets], axis=1)
    needs_exponents = k > 1 or kind.name == "rat"
    exponents = PrimeExponentArray(rng, layout) if needs_exponents else None
    if exponents is not None:
        exponents.ensure_columns(r)
    log_g = exponents.subset_log_g(subsets) if k > 1 else np.zeros(len(subsets))

    if kind.name == "irr":
        offsets = rng.random(len(subsets))
    else:
        offsets = np.ones(len(subsets))
    units = None
    if kind.name == "rat":
        unit_group = np.asarray([u for u in range(1, kind.t) if math.gcd(u, kind.t) == 1], dtype=np.int64)
        units = rng.choice(unit_group, size=r)

    contains_zero = w1 <= 0 <= w2
    if kind.name == "rat":
        candidates = np.arange(len(subsets))
    else:
        spacing_estimate = np.exp(log_g) / products
        q_lo = np.ceil(w1 / spacing_estimate - offsets - CANDIDATE_SLACK)
        q_hi = np.floor(w2 / spacing_estimate - offsets + CANDIDATE_SLACK)
        lattice_counts = q_hi - q_lo + 1
        if kind.name == "zero" and contains_zero:
            lattice_counts -= 1
        candidates = np.flatnonzero(lattice_counts > 0)
    atom_hits = len(subsets) if kind.name == "zero" and contains_zero else 0

    multiplier = math.factorial(k)
    points: List[LimitPoint] = []
    for s in candidates:
        subset = subsets[s]
        G = exponents.subset_g(subset) if k > 1 else 1
        spacing = G / products[s]
        if kind.name == "rat":
            offset = float(_rational_offset(exponents, subset, units, kind.t, small_primes))
        else:
            offset = float(offsets[s])
        for q in range(math.ceil(w1 / spacing - offset), math.floor(w2 / spacing - offset) + 1):
            if kind.has_atom and offset == 1.0 and q == -1:
                if kind.name == "rat":
                    atom_hits += 1
                continue
            position = (q + offset) * spacing
            if w1 <= position <= w2:
                points.append(LimitPoint(position=position, multiplicity=multiplier * G,
                                         subset=tuple(int(i) + 1 for i in subset)))

    points.sort(key=lambda point: point.position)
    report = TruncationReport(
        r=r,
        prime_cutoff=prime_cutoff,
        prime_cutoff_value=layout.last_prime,
        residual=sticks.residual,
        omitted_intensity_bound=k * (w2 - w1) * sticks.residual,
        prime_tail_bound=prime_tail_bound(r, layout) if k > 1 else 0.0,
    )
    if tolerance is not None and report.total_bound > tolerance:
        raise TruncationTooSmall(
            f"truncation bias bound {report.total_bound:.3g} exceeds tolerance {tolerance:.3g}",
            bound=report.total_bound, tolerance=tolerance)
    return LimitWindowSample(points=tuple(points), window=(w1, w2), kind=kind, truncation=report,
                             atom_at_zero=kind.has_atom and w1 <= 0 <= w2, atom_hits=atom_hits)


def sample_limit_windows(k: int, theta, kind, window, reps: int, seed: int, threads: Optional[int] = None,
                         **truncation) -> List[LimitWindowSample]:
    """Independent realizations, replicate i always drawn from the same stream."""
    def one_replicate(replicate, rng):
        return simulate_limit_window(k, theta, kind, window, rng, **truncation)

    return run_replicates(one_replicate, reps, seed, threads=threads, desc="limit process")


def limit_samples_frame(samples: Sequence[LimitWindowSample]) -> pd.DataFrame:
    """Long table of points: replicate, position, multiplicity."""
    rows = [(replicate, point.position, point.multiplicity)
            for replicate, sample in enumerate(samples) for point in sample.points]
    return pd.DataFrame(rows, columns=["replicate", "position", "multiplicity"])


def estimate_pair_correlation(samples: Sequence[LimitWindowSample], lags: Sequence[float],
                              bandwidth: float = 0.1) -> pd.DataFrame:
    """
    Two-point density at the given lags from window samples of a stationary process.

    Counts ordered pairs (a, b) with a in [w1, w2 - lag - bandwidth] and
    b - a within `bandwidth` of the lag, weighted by multiplicities, and
    divides by the area of the pair region.

    Returns:
        DataFrame with columns lag, estimate, std_error, replicates
    """
    rows = []
    for lag in lags:
        per_replicate = []
        area = None
        for sample in samples:
            w1, w2 = sample.window
            span = w2 - lag - bandwidth - w1
            if span <= 0:
                raise ValueError(f"window too short for lag {lag}")
            area = span * 2 * bandwidth
            positions = sample.positions()
            weights = sample.multiplicities()
            total = 0.0
            for a, weight in zip(positions, weights):
                if a > w1 + span:
                    break
                lo = np.searchsorted(positions, a + lag - bandwidth, side="right")
                hi = np.searchsorted(positions, a + lag + bandwidth, side="left")
                total += weight * weights[lo:hi].sum()
            per_replicate.append(total / area)
        values = np.asarray(per_replicate)
        rows.append({"lag": lag, "estimate": values.mean(),
                     "std_error": values.std(ddof=1) / math.sqrt(len(values)), "replicates": len(values)})
    return pd.DataFrame(rows)
