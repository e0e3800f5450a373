#!/usr/bin/env python3
"""
Exact eigenangle spectra of the action of S_n on ordered k-tuples.

A permutation with cycle type ct permutes the tuples of distinct points in
orbits; an orbit of length j contributes the eigenangles 0, 1/j, ..., (j-1)/j.
This module counts orbits by length straight from the cycle counts, cuts the
rescaled spectrum n^k (i/j - alpha) down to a window, and measures
equidistribution with the one-dimensional star discrepancy.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
import pandas as pd

from ewens_sampler import CycleType, EwensParams, falling_factorial, sample_cycle_type
from number_theory import Angle, CertifiedInterval
from permspec_errors import PrecisionExhausted
from replicates import run_replicates

logger = logging.getLogger(__name__)

POSITION_DIGITS = 30


@dataclass(frozen=True)
class OrbitSpectrum:
    """Orbit-length multiplicities C_{j,k} of one permutation acting on k-tuples."""
    n: int
    k: int
    entries: Tuple[Tuple[int, int], ...]

    def as_dict(self) -> Dict[int, int]:
        return dict(self.entries)

    def dimension(self) -> int:
        return sum(j * c for j, c in self.entries)

    def num_orbits(self) -> int:
        return sum(c for _, c in self.entries)


def set_partitions(items: Sequence[int]) -> Iterator[List[List[int]]]:
    """All set partitions of `items` as lists of blocks."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in set_partitions(rest):
        yield [[first]] + partition
        for i in range(len(partition)):
            yield partition[:i] + [[first] + partition[i]] + partition[i + 1:]


def orbit_spectrum(ct: CycleType, k: int) -> OrbitSpectrum:
    """
    Orbit lengths of the induced action on ordered k-tuples of distinct points.

    Coordinates landing in the same cycle form a block of the set partition;
    each block picks a cycle length. Distinct cycles of one length are chosen
    by a falling factorial of the count, points inside a cycle of length l by
    a falling factorial of l. The orbit length is the lcm of the chosen lengths.
    """
    if not 1 <= k <= ct.n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={ct.n}")

    counts = ct.counts_dict()
    lengths = sorted(counts)
    tuples_by_length: Dict[int, int] = {}

    for partition in set_partitions(list(range(k))):
        sizes = [len(block) for block in partition]
        for assignment in itertools.product(lengths, repeat=len(partition)):
            ways = 1
            for length in set(assignment):
                ways *= falling_factorial(counts[length], assignment.count(length))
            if ways == 0:
                continue
            for size, length in zip(sizes, assignment):
                ways *= falling_factorial(length, size)
            if ways == 0:
                continue
            orbit_length = math.lcm(*assignment)
            tuples_by_length[orbit_length] = tuples_by_length.get(orbit_length, 0) + ways

    entries = []
    for j in sorted(tuples_by_length):
        if tuples_by_length[j] % j:
            raise ArithmeticError(f"{tuples_by_length[j]} tuples do not split into orbits of length {j}")
        entries.append((j, tuples_by_length[j] // j))
    return OrbitSpectrum(n=ct.n, k=k, entries=tuple(entries))


@dataclass(frozen=True)
class WindowPoint:
    """One rescaled eigenangle n^k (i/j - alpha); `angle` is the reduced i/j."""
    angle: Fraction
    position: CertifiedInterval
    multiplicity: int
    flagged: bool = False

    def decimal(self, digits: int = POSITION_DIGITS) -> str:
        center = self.position.center
        with mpmath.workdps(digits + 10):
            return mpmath.nstr(mpmath.mpf(center.numerator) / center.denominator, digits)


@dataclass(frozen=True)
class WindowedPointSample:
    points: Tuple[WindowPoint, ...]
    alpha: Angle
    half_width: Fraction
    scale: int

    @property
    def flags(self) -> List[WindowPoint]:
        return [point for point in self.points if point.flagged]

    def count(self, exclude_zero: bool = False) -> int:
        """Total multiplicity; optionally without the point sitting exactly at alpha."""
        return sum(point.multiplicity for point in self.points
                   if not (exclude_zero and point.position.is_exact and point.position.center == 0))


def window_points(spectrum: OrbitSpectrum, alpha: Angle, T, strict: bool = False) -> WindowedPointSample:
    """
    Points of the rescaled spectrum n^k (i/j - alpha) inside the open window (-T, T).

    Args:
        spectrum: Orbit multiplicities of one permutation
        alpha: Window centre
        T: Positive half-width
        strict: Raise instead of flagging points whose membership is undecided

    Returns:
        WindowedPointSample sorted by position; coinciding eigenangles are merged

    Raises:
        PrecisionExhausted: strict mode and a point straddles the window edge
    """
    T = Fraction(T)
    if T <= 0:
        raise ValueError(f"window half-width must be positive, got {T}")
    scale = spectrum.n ** spectrum.k
    center = alpha.center
    error = alpha.error_bound
    reach = T / scale + error

    merged: Dict[Fraction, List] = {}
    for j, multiplicity in spectrum.entries:
        low = math.floor(j * (center - reach))
        high = math.ceil(j * (center + reach))
        for i in range(low, high + 1):
            angle = Fraction(i, j)
            offset = scale * (angle - center)
            radius = scale * error
            if offset + radius <= -T or offset - radius >= T:
                continue
            flagged = not (offset - radius > -T and offset + radius < T)
            if flagged and strict:
                raise PrecisionExhausted(
                    f"eigenangle {angle} is within {float(radius):.3g} of the window edge "
                    f"at {alpha.bits} bits", bits=alpha.bits)
            if angle in merged:
                merged[angle][2] += multiplicity
                merged[angle][3] = merged[angle][3] or flagged
            else:
                merged[angle] = [angle, CertifiedInterval(offset, radius), multiplicity, flagged]

    points = tuple(sorted((WindowPoint(*entry) for entry in merged.values()),
                          key=lambda point: point.position.center))
    if any(point.flagged for point in points):
        logger.warning(f"{sum(p.flagged for p in points)} boundary-uncertain point(s) at alpha={alpha}")
    return WindowedPointSample(points=points, alpha=alpha, half_width=T, scale=scale)


def star_discrepancy_1d(values: Sequence) -> float:
    """
    Discrepancy sup over intervals [a, b) of |#{x in [a, b)}/N - (b - a)|.

    Uses 1/N + max(i/N - x_(i)) - min(i/N - x_(i)) over the sorted sample;
    exact when every value is a Fraction or int.
    """
    if len(values) == 0:
        raise ValueError("discrepancy needs a nonempty sample")
    N = len(values)
    if all(isinstance(v, (Fraction, int)) for v in values):
        ordered = sorted(Fraction(v) for v in values)
        gaps = [Fraction(i + 1, N) - x for i, x in enumerate(ordered)]
        return Fraction(1, N) + max(gaps) - min(gaps)

    ordered = np.sort(np.asarray(values, dtype=float))
    gaps = np.arange(1, N + 1) / N - ordered
    return float(1.0 / N + gaps.max() - gaps.min())


def sample_window_points(params: EwensParams, k: int, alpha: Angle, T, samples: int, seed: int,
                         threads: Optional[int] = None, strict: bool = False) -> pd.DataFrame:
    """
    Sample Ewens permutations and tabulate their windowed eigenangles.

    Returns:
        DataFrame with columns replicate, position, multiplicity, flag
    """
    def one_replicate(replicate, rng):
        ct = sample_cycle_type(params, rng)
        sample = window_points(orbit_spectrum(ct, k), alpha, T, strict=strict)
        return [(replicate, point.decimal(), point.multiplicity, int(point.flagged))
                for point in sample.points]

    rows = []
    for replicate_rows in run_replicates(one_replicate, samples, seed, threads=threads, desc="spectrum"):
        rows.extend(replicate_rows)
    return pd.DataFrame(rows, columns=["replicate", "position", "multiplicity", "flag"])


def sample_window_counts(params: EwensParams, k: int, alpha: Angle, T, samples: int, seed: int,
                         threads: Optional[int] = None, exclude_zero: bool = False) -> np.ndarray:
    """Window point counts (with multiplicity) for `samples` Ewens permutations."""
    def one_replicate(replicate, rng):
        ct = sample_cycle_type(params, rng)
        return window_points(orbit_spectrum(ct, k), alpha, T).count(exclude_zero=exclude_zero)

    return np.asarray(run_replicates(one_replicate, samples, seed, threads=threads, desc="spectrum counts"),
                      dtype=np.int64)
