#!/usr/bin/env python3
"""
Tests for stick breaking, the limit-process simulator and its truncation bookkeeping
"""

import math
import os
from fractions import Fraction

import numpy as np
import pandas as pd
import pytest
from scipy.integrate import quad
from scipy.stats import chisquare, kstest

from convergence_study import two_sample_chi_square
from gap_probability import pair_correlation_phi
from limit_process import (LimitKind, PrimeExponentArray, _rational_offset, default_stick_count,
                           estimate_pair_correlation, limit_intensity, limit_samples_frame, p_theta_unit_interval,
                           pd_largest_density, sample_gem, sample_gem_until, sample_limit_windows,
                           simulate_limit_window)
from permspec_errors import DomainError, TruncationTooSmall
from prime_exponents import row_layout
from replicates import block_stream
from settings import SLOW_TESTS_ENV_VAR

SLOW = os.environ.get(SLOW_TESTS_ENV_VAR) == "1"


def mean_within(values, target, sigmas=4.0):
    values = np.asarray(values, dtype=float)
    error = values.std(ddof=1) / math.sqrt(len(values))
    return abs(values.mean() - target) <= sigmas * error


def test_gem_sticks_and_residual_sum_to_one():
    sample = sample_gem(1.5, 20, block_stream(1, 0))
    assert sample.r == 20
    assert sample.sticks.sum() + sample.residual == pytest.approx(1.0)
    assert np.all(np.diff(sample.sorted_sticks()) <= 0)
    assert sample.largest() == sample.sticks.max()


def test_gem_first_stick_is_beta():
    rng = block_stream(2, 0)
    firsts = [sample_gem(2.0, 1, rng).sticks[0] for _ in range(20_000)]
    assert mean_within(firsts, 1 / 3)


def test_gem_rejects_bad_arguments():
    with pytest.raises(ValueError):
        sample_gem(0, 5, block_stream(0, 0))
    with pytest.raises(ValueError):
        sample_gem(1, 0, block_stream(0, 0))


def test_gem_until_reaches_residual():
    sample = sample_gem_until(1.0, 1e-4, block_stream(3, 0), min_sticks=3)
    assert sample.residual < 1e-4
    assert sample.r >= 3
    assert sample.sticks.sum() + sample.residual == pytest.approx(1.0)


def test_default_stick_count():
    assert default_stick_count(1.0, 1e-3) == 10
    assert default_stick_count(1.0, 0.9, k=3) == 3
    assert (2 / 3) ** default_stick_count(2.0, 1e-3) <= 1e-3


def test_unit_interval_density():
    assert p_theta_unit_interval(0.5, 1) == pytest.approx(math.exp(-np.euler_gamma))
    assert p_theta_unit_interval(0.25, 2) == pytest.approx(math.exp(-2 * np.euler_gamma) * 0.25)
    with pytest.raises(DomainError):
        p_theta_unit_interval(1.5, 1)


def test_largest_part_density_closed_form():
    for theta in (0.5, 1.0, 2.0, 3.5):
        for x in (0.55, 0.7, 0.9):
            assert pd_largest_density(x, theta) == pytest.approx(theta * (1 - x) ** (theta - 1) / x)
    with pytest.raises(DomainError):
        pd_largest_density(0.4, 1)


def test_limit_intensity():
    assert limit_intensity(1, 2.5) == pytest.approx(1.0)
    assert limit_intensity(2, 1) == pytest.approx(0.5)
    assert limit_intensity(3, 1) == pytest.approx(1 / 6)
    assert limit_intensity(2, 2) == pytest.approx(4 * 1 / 6)


def test_limit_kind_parse():
    assert LimitKind.parse("irr") == LimitKind("irr")
    assert LimitKind.parse("rat:5") == LimitKind("rat", 5)
    assert LimitKind.parse("rat:1") == LimitKind("zero")
    assert str(LimitKind.parse("RAT:3")) == "rat:3"
    assert not LimitKind("irr").has_atom
    with pytest.raises(ValueError):
        LimitKind.parse("rat:0")
    with pytest.raises(ValueError):
        LimitKind.parse("complex")


def test_exponent_array_columns_are_stable():
    layout = row_layout(300)
    array = PrimeExponentArray(block_stream(4, 0), layout)
    first = array.column(3)
    array.ensure_columns(50)
    assert array.column(3) == first
    assert array.num_columns == 50
    assert array.entry(1, 3) == first.get(2, 0)
    assert array.entry(301, 3) == 0
    assert array.subset_g([3]) == 1


def test_exponent_array_log_g_matches_exact():
    array = PrimeExponentArray(block_stream(5, 0), row_layout(300))
    subsets = np.asarray([[0, 1], [1, 2], [0, 2], [2, 3]])
    log_g = array.subset_log_g(subsets)
    for s, subset in enumerate(subsets):
        assert log_g[s] == pytest.approx(math.log(array.subset_g(subset)))


def test_rational_offsets_lie_on_the_unit_grid():
    t = 12
    array = PrimeExponentArray(block_stream(6, 0), row_layout(300))
    small_primes = [2, 3]
    units = np.asarray([1, 5, 7, 11, 5, 1])
    for subset in ([0, 1], [2, 3], [1, 4, 5]):
        offset = _rational_offset(array, subset, units, t, small_primes)
        assert 0 < offset <= 1
        assert (offset * t).denominator == 1


def test_irrational_window_sample():
    sample = simulate_limit_window(1, 1, "irr", (-2.0, 3.0), block_stream(7, 0))
    positions = sample.positions()
    assert np.all((positions >= -2.0) & (positions <= 3.0))
    assert np.all(np.diff(positions) >= 0)
    assert np.all(sample.multiplicities() == 1)
    assert not sample.atom_at_zero
    report = sample.truncation
    assert report.residual < 1e-3
    assert report.prime_tail_bound == 0
    assert report.omitted_intensity_bound == pytest.approx(5.0 * report.residual)


def test_k2_multiplicities_are_two_g():
    sample = simulate_limit_window(2, 1, "irr", (0.0, 20.0), block_stream(8, 0), r=12)
    assert sample.truncation.r == 12
    assert all(p.multiplicity % 2 == 0 for p in sample.points)
    assert all(len(p.subset) == 2 and p.subset[0] < p.subset[1] for p in sample.points)
    assert sample.truncation.prime_tail_bound == pytest.approx(66 / 104729)


def test_zero_kind_reports_atom_instead_of_point():
    sample = simulate_limit_window(1, 1, "zero", (-1.0, 1.0), block_stream(9, 0), r=15)
    assert sample.atom_at_zero
    assert sample.atom_hits == 15
    assert all(p.position != 0 for p in sample.points)
    away = simulate_limit_window(1, 1, "zero", (0.5, 1.0), block_stream(9, 0), r=15)
    assert not away.atom_at_zero
    assert away.atom_hits == 0


def test_zero_kind_lattice_points_are_multiples_of_spacing():
    """With k = 1 and a centre at 0 every point is q / L_i"""
    rng = block_stream(10, 0)
    sample = simulate_limit_window(1, 1, "zero", (-4.0, 4.0), rng, r=8)
    sticks = sample_gem(1, 8, block_stream(10, 0)).sticks
    for point in sample.points:
        stick = sticks[point.subset[0] - 1]
        assert point.position * stick == pytest.approx(round(point.position * stick), abs=1e-9)


def test_rational_kind_sample():
    sample = simulate_limit_window(1, 1, "rat:3", (-1.0, 1.0), block_stream(11, 0), r=10)
    assert sample.kind == LimitKind("rat", 3)
    assert sample.atom_at_zero
    assert all(p.position != 0 for p in sample.points)


def test_rational_kind_needs_prime_cutoff_reaching_t():
    with pytest.raises(ValueError):
        simulate_limit_window(1, 1, "rat:7", (-1.0, 1.0), block_stream(12, 0), prime_cutoff=3)


def test_truncation_tolerance():
    with pytest.raises(TruncationTooSmall):
        simulate_limit_window(1, 1, "irr", (0.0, 1.0), block_stream(13, 0), r=2, tolerance=1e-9)


def test_window_validation():
    with pytest.raises(ValueError):
        simulate_limit_window(1, 1, "irr", (1.0, 0.0), block_stream(14, 0))
    with pytest.raises(ValueError):
        simulate_limit_window(2, 1, "irr", (0.0, 1.0), block_stream(14, 0), r=1)


def test_k1_intensity_is_one():
    samples = sample_limit_windows(1, 1, "irr", (0.0, 1.0), 3000, seed=15, threads=1)
    assert mean_within([s.count() for s in samples], 1.0)


def test_k2_intensity_moderate():
    samples = sample_limit_windows(2, 1, "irr", (0.0, 2.0), 3000, seed=16, threads=1)
    assert mean_within([s.count() for s in samples], 1.0)


def test_samples_frame_and_thread_independence(monkeypatch):
    monkeypatch.delenv("PERMSPEC_THREADS", raising=False)
    frames = [limit_samples_frame(sample_limit_windows(2, 1.5, "irr", (-1.0, 1.0), 600, seed=17, threads=threads))
              for threads in (1, 4, 8)]
    assert list(frames[0].columns) == ["replicate", "position", "multiplicity"]
    for frame in frames[1:]:
        pd.testing.assert_frame_equal(frames[0], frame)


def test_pair_correlation_estimator_shape():
    samples = sample_limit_windows(1, 1, "irr", (0.0, 6.0), 200, seed=18, threads=1)
    table = estimate_pair_correlation(samples, [0.5, 1.5])
    assert list(table.columns) == ["lag", "estimate", "std_error", "replicates"]
    assert (table["replicates"] == 200).all()
    with pytest.raises(ValueError):
        estimate_pair_correlation(samples, [10.0])


@pytest.mark.skipif(not SLOW, reason="set PERMSPEC_SLOW_TESTS=1")
def test_k2_intensity_full():
    samples = sample_limit_windows(2, 1, "irr", (0.0, 2.0), 100_000, seed=19)
    assert mean_within([s.count() for s in samples], 1.0)


@pytest.mark.skipif(not SLOW, reason="set PERMSPEC_SLOW_TESTS=1")
def test_pair_correlation_matches_closed_form():
    samples = sample_limit_windows(1, 1, "irr", (0.0, 8.0), 100_000, seed=20)
    table = estimate_pair_correlation(samples, [0.5, 1.5, 2.5], bandwidth=0.05)
    for row in table.itertuples():
        expected = float(pair_correlation_phi(1, Fraction(row.lag)))
        assert abs(row.estimate - expected) <= 3 * row.std_error + 0.01


def largest_parts(theta, size, seed, r=60):
    rng = block_stream(seed, 0)
    return np.asarray([sample_gem(theta, r, rng).largest() for _ in range(size)])


def largest_part_cdf(theta, points=20001):
    """CDF of the largest part conditioned on exceeding 1/2, from pd_largest_density."""
    xs = np.linspace(0.5, 1.0, points)
    mids = 0.5 * (xs[:-1] + xs[1:])
    mass = np.concatenate([[0.0], np.cumsum([pd_largest_density(x, theta) for x in mids]) * (xs[1] - xs[0])])
    return lambda x: np.interp(x, xs, mass / mass[-1])


def check_largest_part_law(theta, size, seed):
    values = largest_parts(theta, size, seed)
    above = values[values > 0.5]
    mass, _ = quad(pd_largest_density, 0.5, 1.0, args=(theta,))
    error = math.sqrt(mass * (1 - mass) / size)
    assert abs(len(above) / size - mass) <= 4 * error
    assert kstest(above, largest_part_cdf(theta)).pvalue > 1e-3
    return values


def test_largest_part_matches_density():
    """P(L1 > 1/2) and the law of L1 on (1/2, 1) against the closed-form density"""
    assert quad(pd_largest_density, 0.5, 1.0, args=(1,))[0] == pytest.approx(math.log(2), abs=1e-9)
    assert quad(pd_largest_density, 0.5, 1.0, args=(2,))[0] == pytest.approx(2 * (math.log(2) - 0.5), abs=1e-9)
    check_largest_part_law(1, 20_000, seed=31)
    values = check_largest_part_law(2, 20_000, seed=32)

    lo, hi = 0.78, 0.82
    bin_mass, _ = quad(pd_largest_density, lo, hi, args=(2,))
    assert bin_mass / (hi - lo) == pytest.approx(pd_largest_density(0.8, 2), abs=1e-3)
    frequency = np.mean((values > lo) & (values <= hi))
    assert abs(frequency - bin_mass) <= 4 * math.sqrt(bin_mass * (1 - bin_mass) / len(values))


@pytest.mark.skipif(not SLOW, reason="set PERMSPEC_SLOW_TESTS=1")
def test_largest_part_ks_full():
    for theta in (1, 2):
        check_largest_part_law(theta, 100_000, seed=40 + theta)


def test_window_counts_are_stationary():
    """Count laws of [a, a+1] agree for a in {0, 0.37, 5.1}"""
    counts = []
    for seed, a in enumerate((0.0, 0.37, 5.1)):
        samples = sample_limit_windows(1, 1, "irr", (a, a + 1.0), 3000, seed=100 + seed, threads=1)
        counts.append(np.asarray([s.count() for s in samples], dtype=np.int64))
    for i in range(3):
        for j in range(i + 1, 3):
            assert two_sample_chi_square(counts[i], counts[j]) > 1e-3
    for c in counts:
        assert mean_within(c, 1.0)


def test_rational_kind_offsets_are_uniform():
    """For k = 1 and t = 6, t times the fractional part of L * position is uniform on {1, ..., 6}"""
    t, r = 6, 8
    observed = np.zeros(t + 1, dtype=np.int64)
    for seed in range(4000):
        sticks = sample_gem(1, r, np.random.default_rng(seed)).sticks
        sample = simulate_limit_window(1, 1, f"rat:{t}", (1e-9, 40.0), np.random.default_rng(seed),
                                       r=r, prime_cutoff=100)
        seen = set()
        for point in sample.points:
            # first lattice point of a stick above 1/39 always falls inside the window
            if point.subset in seen or sticks[point.subset[0] - 1] <= 1 / 39:
                continue
            seen.add(point.subset)
            scaled = point.position * sticks[point.subset[0] - 1] * t
            v = round(scaled)
            assert abs(scaled - v) < 1e-6
            observed[v % t or t] += 1
    counts = observed[1:]
    assert counts.sum() > 8_000
    assert chisquare(counts).pvalue > 1e-3
