#!/usr/bin/env python3
"""
Convergence study: finite-n window counts against the limit process.

For each n, the number of rescaled eigenangles of rho_{n,k} in (-T, T)
around alpha is tabulated over Ewens samples and compared with the count of
the matching limit process in [-T, T]. The report gives the total-variation
distance between the two count histograms and a two-sample chi-square
p-value.
"""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.stats import chi2_contingency

from ewens_sampler import EwensParams
from limit_process import LimitKind, sample_limit_windows
from number_theory import Angle
from orbit_spectrum import sample_window_counts
from settings import DEFAULT_PRIME_CUTOFF_INDEX, DEFAULT_RESIDUAL_EPS

logger = logging.getLogger(__name__)


def count_histogram(counts: np.ndarray, support: int) -> np.ndarray:
    """Relative frequencies of counts 0..support-1."""
    return np.bincount(counts, minlength=support)[:support] / max(len(counts), 1)


def total_variation(first: np.ndarray, second: np.ndarray) -> float:
    """TV distance between two empirical count distributions."""
    support = int(max(first.max(initial=0), second.max(initial=0))) + 1
    return 0.5 * float(np.abs(count_histogram(first, support) - count_histogram(second, support)).sum())


def two_sample_chi_square(first: np.ndarray, second: np.ndarray) -> float:
    """p-value of the chi-square test of homogeneity on the 2 x (count) table."""
    support = int(max(first.max(initial=0), second.max(initial=0))) + 1
    table = np.vstack([np.bincount(first, minlength=support), np.bincount(second, minlength=support)])
    table = table[:, table.sum(axis=0) > 0]
    if table.shape[1] < 2:
        return 1.0
    _, p_value, _, _ = chi2_contingency(table)
    return float(p_value)


class ConvergenceStudy:
    def __init__(self, n_list: Sequence[int], theta, k: int, alpha: Angle, T, reps: int, seed: int,
                 threads: Optional[int] = None,
                 prime_cutoff: int = DEFAULT_PRIME_CUTOFF_INDEX,
                 residual_eps: float = DEFAULT_RESIDUAL_EPS,
                 r: Optional[int] = None,
                 tolerance: Optional[float] = None):
        if not n_list:
            raise ValueError("need at least one n")
        if any(n < k for n in n_list):
            raise ValueError(f"every n must be >= k={k}")
        self.n_list = sorted(int(n) for n in n_list)
        self.theta = theta
        self.k = k
        self.alpha = alpha
        self.T = T
        self.reps = reps
        self.seed = seed
        self.threads = threads
        self.kind = LimitKind.parse(alpha.limit_kind())
        self.prime_cutoff = prime_cutoff
        self.residual_eps = residual_eps
        self.r = r
        self.tolerance = tolerance
        self.limit_counts: Optional[np.ndarray] = None
        self.finite_counts: Dict[int, np.ndarray] = {}
        self.results: Optional[pd.DataFrame] = None

    def simulate_limit(self) -> np.ndarray:
        T = float(self.T)
        samples = sample_limit_windows(self.k, self.theta, self.kind, (-T, T), self.reps, self.seed,
                                       threads=self.threads, prime_cutoff=self.prime_cutoff,
                                       residual_eps=self.residual_eps, r=self.r, tolerance=self.tolerance)
        self.limit_counts = np.asarray([s.count() for s in samples], dtype=np.int64)
        return self.limit_counts

    def simulate_finite(self, n: int) -> np.ndarray:
        # Offset the seed per n so the finite samples are independent of the limit samples
        counts = sample_window_counts(EwensParams(n, self.theta), self.k, self.alpha, self.T, self.reps,
                                      self.seed + n, threads=self.threads, exclude_zero=self.kind.has_atom)
        self.finite_counts[n] = counts
        return counts

    def analyze_convergence(self) -> pd.DataFrame:
        """Run both sides for every n and tabulate the comparison."""
        logger.info(f"Convergence study k={self.k} theta={self.theta} alpha={self.alpha} "
                    f"kind={self.kind} T={self.T} reps={self.reps}")
        limit_counts = self.simulate_limit()
        rows = []
        for n in self.n_list:
            finite = self.simulate_finite(n)
            rows.append({
                "n": n,
                "tv_distance": total_variation(finite, limit_counts),
                "chi2_p_value": two_sample_chi_square(finite, limit_counts),
                "finite_mean": float(finite.mean()),
                "limit_mean": float(limit_counts.mean()),
                "reps": self.reps,
            })
            logger.info(f"n={n}: TV={rows[-1]['tv_distance']:.4f}, p={rows[-1]['chi2_p_value']:.3g}")
        self.results = pd.DataFrame(rows)
        return self.results

    def is_tv_nonincreasing(self, slack: float = 0.0) -> bool:
        tv = self.results["tv_distance"].to_numpy()
        return bool(np.all(np.diff(tv) <= slack))

    def generate_report(self) -> List[str]:
        """Human summary lines."""
        if self.results is None:
            self.analyze_convergence()
        lines = [f"📊 CONVERGENCE STUDY (k={self.k}, theta={self.theta}, alpha={self.alpha}, T={self.T})",
                 f"   Limit kind: {self.kind}, replicates per side: {self.reps}"]
        for row in self.results.itertuples():
            lines.append(f"   n={row.n:>6}: TV={row.tv_distance:.4f}  chi2 p={row.chi2_p_value:.3g}  "
                         f"mean {row.finite_mean:.3f} vs {row.limit_mean:.3f}")
        trend = "✅ TV distance nonincreasing in n" if self.is_tv_nonincreasing() else "⚠️  TV distance not monotone"
        lines.append(f"   {trend}")
        return lines

