#!/usr/bin/env python3
"""
Exact integer and rational number theory plus certified angle arithmetic.

Provides the prime table shared by every module, prime-exponent matrices and
the g_k correction (product over lcm), and the Angle type used to place the
windowed eigenangle processes.
"""

import logging
import math
import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

import mpmath
import numpy as np
from sympy import factorint

from permspec_errors import PrecisionExhausted
from settings import DEFAULT_BITS, MIN_BITS

logger = logging.getLogger(__name__)


class PrimeTable:
    """Prime list grown on demand by re-sieving to twice the previous limit."""

    def __init__(self, initial_limit: int = 1024):
        self._lock = threading.Lock()
        self._limit = 1
        self._primes = np.zeros(0, dtype=np.int64)
        self._sieve_to(initial_limit)

    def _sieve_to(self, limit: int):
        sieve = np.ones(limit + 1, dtype=bool)
        sieve[:2] = False
        for i in range(2, math.isqrt(limit) + 1):
            if sieve[i]:
                sieve[i * i::i] = False
        self._primes = np.flatnonzero(sieve).astype(np.int64)
        self._limit = limit
        logger.debug(f"Prime table extended to {limit} ({len(self._primes)} primes)")

    def _ensure_limit(self, limit: int):
        with self._lock:
            if limit > self._limit:
                new_limit = self._limit
                while new_limit < limit:
                    new_limit *= 2
                self._sieve_to(new_limit)

    def _ensure_count(self, count: int):
        with self._lock:
            while len(self._primes) < count:
                self._sieve_to(self._limit * 2)

    def first(self, count: int) -> np.ndarray:
        """Return the first `count` primes as an int64 array."""
        self._ensure_count(count)
        return self._primes[:count]

    def prime(self, m: int) -> int:
        """Return p_m, with p_1 = 2."""
        if m < 1:
            raise ValueError(f"prime index must be >= 1, got {m}")
        return int(self.first(m)[m - 1])

    def up_to(self, bound: int) -> np.ndarray:
        """Return every prime p <= bound."""
        self._ensure_limit(max(int(bound), 2))
        primes = self._primes
        return primes[:np.searchsorted(primes, bound, side="right")]

    def count_up_to(self, bound: int) -> int:
        return len(self.up_to(bound))


PRIMES = PrimeTable()


@dataclass(frozen=True)
class ExponentMatrix:
    """
    Prime-exponent matrix with one column per factored value.

    Columns are stored sparsely as {prime: exponent}.
    """
    columns: Tuple[Tuple[Tuple[int, int], ...], ...]
    prime_cutoff: Optional[int] = None

    @property
    def num_columns(self) -> int:
        return len(self.columns)

    def column(self, i: int) -> Dict[int, int]:
        return dict(self.columns[i])


def factor_exponents(values: Sequence[int], prime_cutoff: Optional[int] = None) -> ExponentMatrix:
    """
    Factor positive integers into a prime-exponent matrix.

    Args:
        values: Positive integers, one per column
        prime_cutoff: Keep only the primes p_1..p_l; None means full factorization

    Returns:
        ExponentMatrix whose entry (m, i) is the exponent of p_m in values[i]
    """
    max_prime = None if prime_cutoff is None else PRIMES.prime(prime_cutoff)
    columns = []
    for value in values:
        value = int(value)
        if value < 1:
            raise ValueError(f"factor_exponents needs positive integers, got {value}")
        column = {int(p): int(e) for p, e in factorint(value).items()}
        if max_prime is not None:
            column = {p: e for p, e in column.items() if p <= max_prime}
        columns.append(tuple(sorted(column.items())))
    return ExponentMatrix(columns=tuple(columns), prime_cutoff=prime_cutoff)


def g_k(exponents: ExponentMatrix) -> int:
    """
    Product over primes of p^(sum of exponents - max exponent) across the columns.

    On full factorizations this is m_1...m_k / lcm(m_1, ..., m_k).
    """
    if exponents.num_columns < 1:
        raise ValueError("g_k needs at least one column")
    totals: Dict[int, int] = {}
    maxima: Dict[int, int] = {}
    for column in exponents.columns:
        for p, e in column:
            totals[p] = totals.get(p, 0) + e
            maxima[p] = max(maxima.get(p, 0), e)
    return math.prod(p ** (totals[p] - maxima[p]) for p in totals)


@dataclass(frozen=True)
class CertifiedInterval:
    """A value known to lie in [center - radius, center + radius]; radius 0 means exact."""
    center: Fraction
    radius: Fraction = Fraction(0)

    @property
    def lo(self) -> Fraction:
        return self.center - self.radius

    @property
    def hi(self) -> Fraction:
        return self.center + self.radius

    @property
    def is_exact(self) -> bool:
        return self.radius == 0

    def __float__(self):
        return float(self.center)


_SQRT_RE = re.compile(r"^sqrt\(?(\d+)\)?$")
_FRAC_RE = re.compile(r"^frac\((.+)\)$")
_DECIMAL_RE = re.compile(r"^([+-]?\d*\.?\d+):(\d+)$")
_RATIONAL_RE = re.compile(r"^([+-]?\d+)(?:/([+-]?\d+))?$")
_EXACT_DECIMAL_RE = re.compile(r"^[+-]?\d*\.\d+$")

_NAMED_CONSTANTS = {
    "golden": lambda: (1 + mpmath.sqrt(5)) / 2,
    "phi": lambda: (1 + mpmath.sqrt(5)) / 2,
    "e": lambda: mpmath.e,
    "pi": lambda: mpmath.pi,
}


@dataclass(frozen=True)
class Angle:
    """
    A point of the circle R/Z, exact when rational.

    Rational angles keep the reduced fraction s/t in [0, 1). Irrational angles
    keep a dyadic approximation with |alpha - approx| <= error_bound and
    error_bound <= 2^-(bits+1).
    """
    rational: Optional[Fraction] = None
    approx: Optional[Fraction] = None
    error_bound: Fraction = Fraction(0)
    bits: int = 0
    label: str = ""

    @classmethod
    def from_fraction(cls, value, label: str = "") -> "Angle":
        value = Fraction(value)
        reduced = value - math.floor(value)
        return cls(rational=reduced, label=label or str(reduced))

    @classmethod
    def from_mpmath(cls, compute, bits: int = DEFAULT_BITS, label: str = "") -> "Angle":
        """Evaluate an irrational constant once to `bits` fraction bits."""
        if bits < MIN_BITS:
            raise ValueError(f"irrational angles need at least {MIN_BITS} bits, got {bits}")
        scale_bits = bits + 2
        with mpmath.workprec(bits + 96):
            x = compute()
            x = x - mpmath.floor(x)
            mantissa = int(mpmath.nint(x * mpmath.mpf(2) ** scale_bits))
        return cls(approx=Fraction(mantissa, 2 ** scale_bits),
                   error_bound=Fraction(1, 2 ** (bits + 1)), bits=bits, label=label)

    @classmethod
    def parse(cls, text: str, bits: int = DEFAULT_BITS) -> "Angle":
        """
        Parse the command-line angle syntax.

        Accepts `2/5`, `0.25`, `sqrt2`, `sqrt(7)`, `frac(sqrt2)`, `golden`,
        `phi`, `e`, `pi` and `0.7071067811865475:50` (a decimal literal
        with its declared number of correct significant digits).
        """
        raw = text
        text = text.strip().lower()
        frac_match = _FRAC_RE.match(text)
        if frac_match:
            return cls.parse(frac_match.group(1), bits=bits)

        rational_match = _RATIONAL_RE.match(text)
        if rational_match:
            numerator = int(rational_match.group(1))
            denominator = int(rational_match.group(2) or 1)
            if denominator == 0:
                raise ValueError(f"angle {raw!r} has a zero denominator")
            return cls.from_fraction(Fraction(numerator, denominator), label=raw)

        if _EXACT_DECIMAL_RE.match(text):
            return cls.from_fraction(Fraction(text), label=raw)

        sqrt_match = _SQRT_RE.match(text)
        if sqrt_match:
            d = int(sqrt_match.group(1))
            root = math.isqrt(d)
            if root * root == d:
                return cls.from_fraction(Fraction(root), label=raw)
            return cls.from_mpmath(lambda: mpmath.sqrt(d), bits=bits, label=raw)

        if text in _NAMED_CONSTANTS:
            return cls.from_mpmath(_NAMED_CONSTANTS[text], bits=bits, label=raw)

        decimal_match = _DECIMAL_RE.match(text)
        if decimal_match:
            literal = Fraction(decimal_match.group(1))
            digits = int(decimal_match.group(2))
            declared_bits = math.floor(digits * math.log2(10)) - 2
            use_bits = min(bits, declared_bits)
            if use_bits < MIN_BITS:
                raise ValueError(
                    f"angle {raw!r} declares {digits} digits, below the {MIN_BITS}-bit minimum")
            literal -= math.floor(literal)
            scale_bits = use_bits + 2
            mantissa = round(literal * 2 ** scale_bits)
            return cls(approx=Fraction(mantissa, 2 ** scale_bits),
                       error_bound=Fraction(1, 2 ** (use_bits + 1)), bits=use_bits, label=raw)

        raise ValueError(f"cannot parse angle {raw!r}")

    @property
    def is_rational(self) -> bool:
        return self.rational is not None

    @property
    def numerator(self) -> int:
        return self.rational.numerator

    @property
    def denominator(self) -> int:
        return self.rational.denominator

    @property
    def center(self) -> Fraction:
        return self.rational if self.is_rational else self.approx

    def limit_kind(self) -> str:
        """Rationality class of the angle as used by the limit simulator."""
        if not self.is_rational:
            return "irr"
        if self.rational == 0:
            return "zero"
        return f"rat:{self.denominator}"

    def __str__(self):
        return self.label or (str(self.rational) if self.is_rational else f"{float(self.approx):.17g}")


def psi_alpha(j: int, alpha: Angle) -> CertifiedInterval:
    """
    Smallest positive value of q - j*alpha over integers q.

    Exact for rational alpha. For irrational alpha the result carries a
    radius of j * alpha.error_bound.

    Raises:
        PrecisionExhausted: the certified interval of j*alpha contains an integer
    """
    if j < 1:
        raise ValueError(f"psi_alpha needs j >= 1, got {j}")
    if alpha.is_rational:
        x = j * alpha.rational
        remainder = x - math.floor(x)
        return CertifiedInterval(Fraction(1) - remainder if remainder > 0 else Fraction(1))

    x = j * alpha.approx
    remainder = x - math.floor(x)
    radius = j * alpha.error_bound
    if remainder - radius <= 0 or remainder + radius >= 1:
        raise PrecisionExhausted(
            f"frac({j}*alpha) is within {float(radius):.3g} of an integer at {alpha.bits} bits",
            bits=alpha.bits)
    return CertifiedInterval(Fraction(1) - remainder, radius)
