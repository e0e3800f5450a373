#!/usr/bin/env python3
"""
Samplers for the geometric prime-exponent array X[m, i].

X[m, i] is the exponent of p_m in a "uniform random integer":
P{X = a} = (1 - 1/p) p^-a. Rows of small primes are drawn densely. Rows of
larger primes are almost always zero, so their nonzero entries are found by
thinning: primes in [2^b, 2^(b+1)) are proposed at rate 2^-b via geometric
skips and accepted with probability 2^b/p.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import List

import numpy as np

from number_theory import PRIMES
from settings import DEFAULT_PRIME_CUTOFF_INDEX, DENSE_PRIME_ROWS

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PrimeRowLayout:
    primes: np.ndarray
    dense_rows: int
    block_starts: np.ndarray
    block_stops: np.ndarray
    block_probs: np.ndarray

    @property
    def cutoff(self) -> int:
        return len(self.primes)

    @property
    def dense_primes(self) -> np.ndarray:
        return self.primes[:self.dense_rows]

    @property
    def last_prime(self) -> int:
        return int(self.primes[-1])


@lru_cache(maxsize=16)
def row_layout(prime_cutoff: int = DEFAULT_PRIME_CUTOFF_INDEX,
               dense_rows: int = DENSE_PRIME_ROWS) -> PrimeRowLayout:
    """Row layout for primes p_1..p_L with the first `dense_rows` drawn densely."""
    if prime_cutoff < 1:
        raise ValueError(f"prime cutoff must be >= 1, got {prime_cutoff}")
    primes = PRIMES.first(prime_cutoff).copy()
    dense_rows = min(dense_rows, prime_cutoff)
    sparse = primes[dense_rows:]
    octaves = np.floor(np.log2(sparse)).astype(np.int64)
    starts, stops, probs = [], [], []
    for octave in np.unique(octaves):
        rows = np.flatnonzero(octaves == octave) + dense_rows
        starts.append(rows[0])
        stops.append(rows[-1] + 1)
        probs.append(2.0 ** -int(octave))
    return PrimeRowLayout(primes=primes, dense_rows=dense_rows,
                          block_starts=np.asarray(starts, dtype=np.int64),
                          block_stops=np.asarray(stops, dtype=np.int64),
                          block_probs=np.asarray(probs, dtype=float))


@dataclass
class ExponentDraw:
    """
    Exponents for a batch of columns.

    dense has shape (columns, dense_rows); the sparse rows are listed as
    nonzero (column, prime, exponent) triples.
    """
    dense: np.ndarray
    sparse_column: np.ndarray
    sparse_prime: np.ndarray
    sparse_exponent: np.ndarray

    @property
    def num_columns(self) -> int:
        return self.dense.shape[0]


def _bernoulli_successes(rng: np.random.Generator, trials: np.ndarray, probs: np.ndarray) -> List[np.ndarray]:
    """Success positions of independent Bernoulli(probs[b]) trials over range(trials[b]), per block."""
    if len(trials) == 0:
        return []
    means = trials * probs
    width = int(np.ceil(np.max(means + 6.0 * np.sqrt(means)))) + 8
    positions = np.cumsum(rng.geometric(probs[:, None], size=(len(trials), width)), axis=1) - 1
    result = []
    for b, row in enumerate(positions):
        while row[-1] < trials[b]:
            extra = np.cumsum(rng.geometric(probs[b], size=width))
            row = np.concatenate([row, row[-1] + extra])
        result.append(row[row < trials[b]])
    return result


def sample_exponent_columns(layout: PrimeRowLayout, columns: int, rng: np.random.Generator) -> ExponentDraw:
    """Draw X[m, i] for m <= layout.cutoff and `columns` new columns."""
    dense_primes = layout.dense_primes
    dense = rng.geometric(1.0 - 1.0 / dense_primes, size=(columns, len(dense_primes))) - 1

    sizes = layout.block_stops - layout.block_starts
    successes = _bernoulli_successes(rng, sizes * columns, layout.block_probs)
    column_parts, prime_parts, prob_parts = [], [], []
    for b, positions in enumerate(successes):
        column_parts.append(positions // sizes[b])
        prime_parts.append(layout.primes[layout.block_starts[b] + positions % sizes[b]])
        prob_parts.append(np.full(len(positions), layout.block_probs[b]))

    if column_parts:
        candidate_columns = np.concatenate(column_parts)
        candidate_primes = np.concatenate(prime_parts)
        candidate_probs = np.concatenate(prob_parts)
    else:
        candidate_columns = candidate_primes = np.zeros(0, dtype=np.int64)
        candidate_probs = np.zeros(0)

    accepted = rng.random(len(candidate_primes)) < 1.0 / (candidate_primes * candidate_probs)
    sparse_primes = candidate_primes[accepted]
    exponents = rng.geometric(1.0 - 1.0 / sparse_primes) if len(sparse_primes) else np.zeros(0, dtype=np.int64)
    return ExponentDraw(dense=dense.astype(np.int64),
                        sparse_column=candidate_columns[accepted].astype(np.int64),
                        sparse_prime=sparse_primes.astype(np.int64),
                        sparse_exponent=np.asarray(exponents, dtype=np.int64))


def merge_draws(first: ExponentDraw, second: ExponentDraw) -> ExponentDraw:
    """Append the columns of `second` after those of `first`."""
    offset = first.num_columns
    return ExponentDraw(dense=np.vstack([first.dense, second.dense]),
                        sparse_column=np.concatenate([first.sparse_column, second.sparse_column + offset]),
                        sparse_prime=np.concatenate([first.sparse_prime, second.sparse_prime]),
                        sparse_exponent=np.concatenate([first.sparse_exponent, second.sparse_exponent]))


def _excess(values: np.ndarray, axis: int) -> np.ndarray:
    """Sum minus max over the members of each subset."""
    return values.sum(axis=axis) - values.max(axis=axis)


def batch_subset_log_g(draw: ExponentDraw, layout: PrimeRowLayout, reps: int, r: int,
                       subsets: np.ndarray) -> np.ndarray:
    """
    log g_k for every k-subset of every replicate.

    Args:
        draw: Exponents for reps * r columns, replicate-major
        layout: Row layout the draw was sampled with
        reps: Number of replicates in the draw
        r: Columns per replicate
        subsets: (S, k) array of column indices within a replicate

    Returns:
        Array of shape (reps, S)
    """
    log_dense = np.log(layout.dense_primes.astype(float))
    dense = draw.dense.reshape(reps, r, -1)
    log_g = _excess(dense[:, subsets, :], axis=2) @ log_dense

    if len(draw.sparse_prime):
        replicate = draw.sparse_column // r
        column = draw.sparse_column % r
        keys = replicate * (layout.last_prime + 1) + draw.sparse_prime
        unique_keys, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
        for group in np.flatnonzero(counts >= 2):
            members = np.flatnonzero(inverse == group)
            rep = int(replicate[members[0]])
            exponents = np.zeros(r, dtype=np.int64)
            exponents[column[members]] = draw.sparse_exponent[members]
            log_g[rep] += _excess(exponents[subsets], axis=1) * np.log(float(draw.sparse_prime[members[0]]))
    return log_g


def k_subsets(r: int, k: int) -> np.ndarray:
    """All k-subsets of range(r) in lexicographic order, shape (C(r, k), k)."""
    subsets = np.asarray(list(combinations(range(r), k)), dtype=np.int64)
    return subsets.reshape(-1, k)


def prime_tail_bound(r: int, layout: PrimeRowLayout) -> float:
    """Bound C(r, 2)/p_L on the chance two of r columns share a prime beyond the cutoff."""
    return r * (r - 1) / 2 / layout.last_prime
