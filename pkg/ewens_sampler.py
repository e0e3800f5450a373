#!/usr/bin/env python3
"""
Cycle structure of Ewens(theta) random permutations.

Sampling uses sequential insertion: element i opens a new cycle with
probability theta/(theta+i-1). Read through the Feller coupling, the cycle
lengths are the spacings between successive openings, so only cycle counts
are ever built.
"""

import json
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Mapping, Tuple, Union

import numpy as np
from scipy.special import gammaln

logger = logging.getLogger(__name__)

Theta = Union[Fraction, float]


def parse_theta(value) -> Theta:
    """Keep theta exact when it is given as an integer, fraction or decimal literal."""
    if isinstance(value, (Fraction, int)):
        return Fraction(value)
    if isinstance(value, float):
        return value
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError):
        return float(value)


def rising_factorial(x, n: int):
    """x (x+1) ... (x+n-1)."""
    result = Fraction(1) if isinstance(x, Fraction) else 1.0
    for i in range(n):
        result *= x + i
    return result


def falling_factorial(x: int, n: int) -> int:
    """x (x-1) ... (x-n+1); zero when n > x."""
    if n > x:
        return 0
    return math.perm(x, n)


@dataclass(frozen=True)
class EwensParams:
    n: int
    theta: Theta

    def __post_init__(self):
        object.__setattr__(self, "theta", parse_theta(self.theta))
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")

    @property
    def is_exact(self) -> bool:
        return isinstance(self.theta, Fraction)


@dataclass(frozen=True)
class CycleType:
    """Cycle counts of a permutation of n points, as sorted (length, count) pairs."""
    n: int
    counts: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        if any(j < 1 or c < 0 for j, c in self.counts):
            raise ValueError(f"invalid cycle counts {self.counts}")
        total = sum(j * c for j, c in self.counts)
        if total != self.n:
            raise ValueError(f"cycle lengths sum to {total}, expected n={self.n}")

    @classmethod
    def from_counts(cls, counts: Mapping[int, int], n: int = None) -> "CycleType":
        pairs = tuple(sorted((int(j), int(c)) for j, c in counts.items() if c > 0))
        if n is None:
            n = sum(j * c for j, c in pairs)
        return cls(n=n, counts=pairs)

    @classmethod
    def from_lengths(cls, lengths) -> "CycleType":
        counts: Dict[int, int] = {}
        for length in lengths:
            counts[int(length)] = counts.get(int(length), 0) + 1
        return cls.from_counts(counts)

    def counts_dict(self) -> Dict[int, int]:
        return dict(self.counts)

    def count(self, j: int) -> int:
        return self.counts_dict().get(j, 0)

    @property
    def num_cycles(self) -> int:
        return sum(c for _, c in self.counts)

    def lengths(self) -> List[int]:
        """All cycle lengths, longest first."""
        return [j for j, c in reversed(self.counts) for _ in range(c)]

    def largest(self, r: int) -> List[int]:
        """The r longest cycle lengths L_1 >= L_2 >= ..., padded with zeros."""
        lengths = self.lengths()[:r]
        return lengths + [0] * (r - len(lengths))

    def to_json(self) -> Dict:
        return {"n": self.n, "cycles": {str(j): c for j, c in self.counts}}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data) -> "CycleType":
        if isinstance(data, str):
            data = json.loads(data)
        return cls.from_counts({int(j): int(c) for j, c in data["cycles"].items()}, n=int(data["n"]))


def _opening_probabilities(params: EwensParams) -> np.ndarray:
    theta = float(params.theta)
    i = np.arange(1, params.n + 1, dtype=float)
    return theta / (theta + i - 1.0)


def sample_cycle_type(params: EwensParams, rng: np.random.Generator) -> CycleType:
    """
    Draw one Ewens(theta) cycle type.

    Args:
        params: Permutation size and Ewens parameter
        rng: Random stream owned by the caller

    Returns:
        CycleType distributed by the Ewens sampling formula
    """
    opens = rng.random(params.n) < _opening_probabilities(params)
    opens[0] = True
    positions = np.append(np.flatnonzero(opens), params.n)
    lengths, counts = np.unique(np.diff(positions), return_counts=True)
    return CycleType.from_counts(dict(zip(lengths.tolist(), counts.tolist())), n=params.n)


def sample_cycle_types(params: EwensParams, size: int, rng: np.random.Generator) -> List[CycleType]:
    """Draw `size` independent cycle types from one stream."""
    draws = rng.random((size, params.n)) < _opening_probabilities(params)
    draws[:, 0] = True
    result = []
    for row in draws:
        positions = np.append(np.flatnonzero(row), params.n)
        lengths, counts = np.unique(np.diff(positions), return_counts=True)
        result.append(CycleType.from_counts(dict(zip(lengths.tolist(), counts.tolist())), n=params.n))
    return result


def cycle_type_pmf(params: EwensParams, ct: CycleType):
    """
    Ewens sampling formula n!/theta^(n rising) * prod_j (theta/j)^c_j / c_j!.

    Returns an exact Fraction when theta is rational, otherwise a float
    evaluated in log space.
    """
    if ct.n != params.n:
        return Fraction(0) if params.is_exact else 0.0

    if params.is_exact:
        theta = params.theta
        value = Fraction(math.factorial(params.n)) / rising_factorial(theta, params.n)
        for j, c in ct.counts:
            value *= (theta / j) ** c / math.factorial(c)
        return value

    theta = float(params.theta)
    log_value = gammaln(params.n + 1) - (gammaln(theta + params.n) - gammaln(theta))
    for j, c in ct.counts:
        log_value += c * math.log(theta / j) - gammaln(c + 1)
    return float(np.exp(log_value))


def integer_partitions(n: int, largest: int = None) -> Iterator[List[int]]:
    """Partitions of n as non-increasing lists."""
    if largest is None:
        largest = n
    if n == 0:
        yield []
        return
    for first in range(min(n, largest), 0, -1):
        for rest in integer_partitions(n - first, first):
            yield [first] + rest


def enumerate_cycle_types(n: int) -> List[CycleType]:
    """Every cycle type of S_n."""
    return [CycleType.from_lengths(partition) for partition in integer_partitions(n)]


def class_size(ct: CycleType) -> int:
    """Number of permutations of S_n with the given cycle type."""
    denominator = 1
    for j, c in ct.counts:
        denominator *= j ** c * math.factorial(c)
    return math.factorial(ct.n) // denominator


def expected_cycle_count(n: int, theta, j: int):
    """
    E[C_j] for an Ewens(theta) permutation of n points.

    theta/j * prod_{i=0}^{j-1} (n-i)/(theta+n-i-1); exact for rational theta.
    """
    theta = parse_theta(theta)
    if j < 1 or j > n:
        return Fraction(0) if isinstance(theta, Fraction) else 0.0
    value = theta / j
    for i in range(j):
        value *= (n - i) / (theta + n - i - 1) if not isinstance(theta, Fraction) \
            else Fraction(n - i) / (theta + n - i - 1)
    return value
