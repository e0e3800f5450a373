#!/usr/bin/env python3
"""
permspec: eigenvalue point processes of S_n acting on k-tuples under Ewens(theta).

Subcommands:
    pmf          Ewens probability of a cycle type (or of every cycle type of S_n)
    sample       Sample cycle types as JSON lines, chi-square check against pmf
    spectrum     Windowed eigenangles of sampled permutations (CSV/JSON)
    limit        Points of the limiting process in a window (CSV)
    gap-mc       Monte Carlo gap probability
    gap-series   Exact theta = 1 power series of the gap probability
    phi          Two-point correlation of the one-dimensional limit
    discrepancy  Star discrepancy of frac(j * alpha) or of a list of values
    converge     Finite-n window counts against the limit process

Data is written to --output (default stdout); the run manifest goes to
<output>.manifest.json, or to stderr when data is on stdout.

Exit codes: 0 ok, 2 usage or domain error, 3 precision or truncation failure.
"""

import argparse
import logging
import sys
from collections import Counter
from fractions import Fraction
from typing import List, Optional

import numpy as np
import pandas as pd
from scipy.stats import chisquare

from convergence_study import ConvergenceStudy
from ewens_sampler import CycleType, EwensParams, cycle_type_pmf, enumerate_cycle_types, parse_theta, sample_cycle_types
from gap_probability import gap_mc, gap_series, gap_series_eval, pair_correlation_phi
from limit_process import LimitKind, limit_intensity, limit_samples_frame, sample_limit_windows
from number_theory import Angle
from orbit_spectrum import orbit_spectrum, sample_window_points, star_discrepancy_1d, window_points
from permspec_errors import PrecisionExhausted, ResourceLimitExceeded, TruncationTooSmall
from replicates import run_blocks
from run_manifest import RunManifest, write_csv, write_json, write_json_lines
from settings import (DEFAULT_BITS, DEFAULT_PRIME_CUTOFF_INDEX, DEFAULT_PSI_TOL, DEFAULT_RESIDUAL_EPS,
                      MIN_BITS, SAMPLE_CHECK_MAX_N)

logger = logging.getLogger("permspec")

EXIT_OK = 0
EXIT_NUMERICAL = 3


def summary(*lines: str):
    """Human-readable summary on stderr, after the data."""
    for line in lines:
        print(line, file=sys.stderr)


def parse_cycles(text: str) -> CycleType:
    """Cycle type from `3,2,2,1` (cycle lengths) or `{"n":..,"cycles":{..}}`."""
    text = text.strip()
    if text.startswith("{"):
        return CycleType.from_json(text)
    lengths = [int(part) for part in text.replace(" ", "").split(",") if part]
    return CycleType.from_lengths(lengths)


def probability_text(value) -> str:
    return str(value) if isinstance(value, Fraction) else f"{value:.17g}"


def cmd_pmf(args) -> RunManifest:
    params = EwensParams(args.n, args.theta)
    manifest = RunManifest("pmf", {"n": args.n, "theta": str(params.theta), "cycles": args.cycles})
    if args.cycles:
        cycle_types = [parse_cycles(args.cycles)]
    else:
        cycle_types = enumerate_cycle_types(args.n)
    records = []
    for ct in cycle_types:
        record = ct.to_json()
        record["pmf"] = probability_text(cycle_type_pmf(params, ct))
        record["err"] = "0"
        records.append(record)
    write_json(records[0] if args.cycles else records, args.output)
    return manifest


def cmd_sample(args) -> RunManifest:
    params = EwensParams(args.n, args.theta)
    manifest = RunManifest("sample", {"n": args.n, "theta": str(params.theta), "samples": args.samples},
                           seed=args.seed)

    def block_task(block, start, stop, rng):
        return sample_cycle_types(params, stop - start, rng)

    draws = [ct for block in run_blocks(block_task, args.samples, args.seed, threads=args.threads,
                                        desc="cycle types")
             for ct in block]
    write_json_lines((ct.to_json() for ct in draws), args.output)

    observed = Counter(ct.counts for ct in draws)
    if args.n > SAMPLE_CHECK_MAX_N:
        logger.info(f"Skipping the goodness-of-fit table for n={args.n} > {SAMPLE_CHECK_MAX_N}")
        manifest.truncation = {"chi2_p_value": None}
        summary(f"📊 {args.samples} cycle types of S_{args.n} at theta={params.theta}",
                f"   distinct types seen: {len(observed)}")
        return manifest

    cycle_types = enumerate_cycle_types(args.n)
    expected = np.asarray([float(cycle_type_pmf(params, ct)) for ct in cycle_types]) * args.samples
    counts = np.asarray([observed.get(ct.counts, 0) for ct in cycle_types], dtype=float)
    _, p_value = chisquare(counts, expected)
    manifest.truncation = {"chi2_p_value": float(p_value)}
    summary(f"📊 {args.samples} cycle types of S_{args.n} at theta={params.theta}",
            f"   distinct types seen: {len(observed)} of {len(cycle_types)}",
            f"   chi-square p-value against the sampling formula: {p_value:.4g}")
    return manifest


def cmd_spectrum(args) -> RunManifest:
    alpha = Angle.parse(args.alpha, args.bits)
    params = EwensParams(args.n, args.theta)
    T = Fraction(args.T)
    manifest = RunManifest("spectrum", {"n": args.n, "theta": str(params.theta), "k": args.k,
                                        "alpha": args.alpha, "T": str(T), "samples": args.samples,
                                        "cycles": args.cycles, "strict": args.strict},
                           seed=args.seed, bits=alpha.bits)
    if args.cycles:
        ct = parse_cycles(args.cycles)
        sample = window_points(orbit_spectrum(ct, args.k), alpha, T, strict=args.strict)
        df = pd.DataFrame([(0, p.decimal(), p.multiplicity, int(p.flagged)) for p in sample.points],
                          columns=["replicate", "position", "multiplicity", "flag"])
    else:
        df = sample_window_points(params, args.k, alpha, T, args.samples, args.seed,
                                  threads=args.threads, strict=args.strict)
    if args.out == "json":
        write_json(df.to_dict(orient="records"), args.output)
    else:
        write_csv(df, args.output)
    flagged = int(df["flag"].sum()) if len(df) else 0
    manifest.truncation = {"flagged_points": flagged}
    summary(f"📊 {len(df)} windowed eigenangles (k={args.k}, n={args.n}, alpha={alpha})",
            f"   boundary-uncertain points: {flagged}")
    return manifest


def truncation_params(args) -> dict:
    return {"r": args.r, "prime_cutoff": args.prime_cutoff, "residual_eps": args.residual_eps,
            "tolerance": args.tol}


def cmd_limit(args) -> RunManifest:
    kind = LimitKind.parse(args.kind)
    window = (float(args.window[0]), float(args.window[1]))
    truncation = truncation_params(args)
    manifest = RunManifest("limit", {"k": args.k, "theta": str(args.theta), "kind": str(kind),
                                     "window": list(window), "reps": args.reps, **truncation},
                           seed=args.seed)
    samples = sample_limit_windows(args.k, parse_theta(args.theta), kind, window, args.reps, args.seed,
                                   threads=args.threads, **truncation)
    write_csv(limit_samples_frame(samples), args.output)

    worst = max(samples, key=lambda s: s.truncation.total_bound).truncation
    manifest.truncation = worst.to_dict()
    mean_count = float(np.mean([s.count() for s in samples])) if samples else 0.0
    lines = [f"📊 {args.reps} realizations of the k={args.k} limit process ({kind}) on {list(window)}",
             f"   mean count: {mean_count:.4f}",
             f"   worst truncation bound: {worst.total_bound:.3g}"]
    if kind.name == "irr":
        intensity = limit_intensity(args.k, parse_theta(args.theta)) * (window[1] - window[0])
        lines.append(f"   expected count: {intensity:.4f}")
    if kind.has_atom and window[0] <= 0 <= window[1]:
        lines.append("   atom at 0 not listed")
    summary(*lines)
    return manifest


def cmd_gap_mc(args) -> RunManifest:
    truncation = truncation_params(args)
    manifest = RunManifest("gap-mc", {"k": args.k, "theta": str(args.theta), "y1": args.y1, "y2": args.y2,
                                      "reps": args.reps, **truncation}, seed=args.seed)
    estimate = gap_mc(args.k, parse_theta(args.theta), args.y1, args.y2, args.reps, args.seed,
                      threads=args.threads, **truncation)
    write_json(estimate.to_dict(), args.output)
    manifest.truncation = {"bias_bound": estimate.bias_bound, "r": estimate.r}
    summary(f"📊 P(no point in [{args.y1}, {args.y2}]) = {estimate.estimate:.6f} "
            f"± {estimate.std_error:.2g} (bias <= {estimate.bias_bound:.2g})")
    return manifest


def cmd_gap_series(args) -> RunManifest:
    manifest = RunManifest("gap-series", {"k": args.k, "order": args.order, "tol": args.tol,
                                          "eval": args.eval})
    series = gap_series(args.k, args.order, args.tol)
    payload = series.to_json()
    if args.eval is not None:
        evaluated = gap_series_eval(series, args.eval)
        payload["eval"] = {"x": args.eval, "value": evaluated.value,
                           "err": evaluated.coefficient_error, "tail": evaluated.tail_estimate}
    write_json(payload, args.output)
    manifest.truncation = {"max_coefficient_error": max(float(c.error) for c in series.coefficients)}
    summary(f"📊 gap series for k={args.k} up to order {args.order}",
            *[f"   c_{c.m} = {c.value_text()}" for c in series.coefficients])
    return manifest


def cmd_phi(args) -> RunManifest:
    theta = parse_theta(args.theta)
    manifest = RunManifest("phi", {"theta": str(theta), "x": args.x})
    records = []
    for text in args.x:
        x = Fraction(text) if isinstance(theta, Fraction) else float(text)
        value = pair_correlation_phi(theta, x)
        records.append({"x": text, "value": probability_text(value) if value != float("inf") else "inf",
                        "err": "0"})
    write_json(records, args.output)
    return manifest


def read_values(path: str) -> list:
    """One value per line; exact when every line is an integer, fraction or decimal."""
    with open(path, encoding="utf-8") as f:
        lines = [line.strip() for line in f if line.strip()]
    try:
        return [Fraction(line) for line in lines]
    except ValueError:
        return [float(line) for line in lines]


def cmd_discrepancy(args) -> RunManifest:
    manifest = RunManifest("discrepancy", {"alpha": args.alpha, "count": args.count, "input": args.input},
                           bits=args.bits)
    if args.input:
        values = read_values(args.input)
    elif args.alpha:
        alpha = Angle.parse(args.alpha, args.bits)
        multiples = [(j * alpha.center) % 1 for j in range(1, args.count + 1)]
        values = multiples if alpha.is_rational else [float(v) for v in multiples]
    else:
        raise ValueError("discrepancy needs --alpha or --input")
    if any(not 0 <= v < 1 for v in values):
        raise ValueError("discrepancy values must lie in [0, 1)")
    value = star_discrepancy_1d(values)
    write_json({"count": len(values), "discrepancy": probability_text(value),
                "err": "0"}, args.output)
    summary(f"📊 star discrepancy of {len(values)} values: {float(value):.6g}")
    return manifest


def cmd_converge(args) -> RunManifest:
    alpha = Angle.parse(args.alpha, args.bits)
    manifest = RunManifest("converge", {"n_list": args.n_list, "theta": str(args.theta), "k": args.k,
                                        "alpha": args.alpha, "T": args.T, "reps": args.reps,
                                        **truncation_params(args)},
                           seed=args.seed, bits=alpha.bits)
    study = ConvergenceStudy(args.n_list, parse_theta(args.theta), args.k, alpha, Fraction(args.T), args.reps,
                             args.seed, threads=args.threads, **truncation_params(args))
    write_csv(study.analyze_convergence(), args.output)
    summary(*study.generate_report())
    return manifest


def common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="Master seed (default: 0)")
    common.add_argument("--threads", type=int, default=None, help="Worker threads (capped by PERMSPEC_THREADS)")
    common.add_argument("--bits", type=int, default=DEFAULT_BITS, help=f"Angle precision in bits (default: {DEFAULT_BITS})")
    common.add_argument("--output", "-o", default="-", help="Output file, '-' for stdout (default)")
    common.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        dest="log_level", help="Logging level (default: INFO)")
    return common


def truncation_options() -> argparse.ArgumentParser:
    truncation = argparse.ArgumentParser(add_help=False)
    truncation.add_argument("--r", type=int, default=None, help="Sticks per realization (default: adaptive)")
    truncation.add_argument("--prime-cutoff", type=int, default=DEFAULT_PRIME_CUTOFF_INDEX, dest="prime_cutoff",
                            help=f"Index of the last prime with sampled exponents (default: {DEFAULT_PRIME_CUTOFF_INDEX})")
    truncation.add_argument("--residual-eps", type=float, default=DEFAULT_RESIDUAL_EPS, dest="residual_eps",
                            help=f"Residual stick mass target (default: {DEFAULT_RESIDUAL_EPS:g})")
    truncation.add_argument("--tol", type=float, default=None, help="Fail when the truncation bias bound exceeds this")
    return truncation


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="permspec",
                                     description="Eigenvalue point processes of Ewens random permutations")
    sub = parser.add_subparsers(dest="command", required=True)
    common = common_options()
    truncation = truncation_options()

    p = sub.add_parser("pmf", parents=[common], help="Ewens probability of cycle types")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta", default="1")
    p.add_argument("--cycles", default=None, help="Cycle lengths, e.g. 3,2,1 (default: every type)")
    p.set_defaults(handler=cmd_pmf)

    p = sub.add_parser("sample", parents=[common], help="Sample Ewens cycle types")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta", default="1")
    p.add_argument("--samples", type=int, default=1000)
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("spectrum", parents=[common], help="Windowed finite-n eigenangles")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta", default="1")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--alpha", required=True, help="Angle: 2/5, sqrt2, frac(sqrt2), 0.7071067811865475:50")
    p.add_argument("--T", default="1", help="Window half-width")
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--cycles", default=None, help="Use this cycle type instead of sampling")
    p.add_argument("--strict", action="store_true", help="Fail on boundary-uncertain points")
    p.add_argument("--out", choices=["csv", "json"], default="csv")
    p.set_defaults(handler=cmd_spectrum)

    p = sub.add_parser("limit", parents=[common, truncation], help="Limit process in a window")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--theta", default="1")
    p.add_argument("--kind", default="irr", help="irr, rat:t or zero")
    p.add_argument("--window", type=float, nargs=2, metavar=("W1", "W2"), default=(-1.0, 1.0))
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--out", choices=["csv"], default="csv")
    p.set_defaults(handler=cmd_limit)

    p = sub.add_parser("gap-mc", parents=[common, truncation], help="Monte Carlo gap probability")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--theta", default="1")
    p.add_argument("--y1", type=float, default=0.0)
    p.add_argument("--y2", type=float, required=True)
    p.add_argument("--reps", type=int, default=100_000)
    p.set_defaults(handler=cmd_gap_mc)

    p = sub.add_parser("gap-series", parents=[common], help="Exact theta = 1 gap series")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--tol", type=float, default=DEFAULT_PSI_TOL)
    p.add_argument("--eval", type=float, default=None, help="Also evaluate the partial sum at this x")
    p.add_argument("--out", choices=["json"], default="json")
    p.set_defaults(handler=cmd_gap_series)

    p = sub.add_parser("phi", parents=[common], help="Two-point correlation of the k = 1 limit")
    p.add_argument("--theta", default="1")
    p.add_argument("--x", nargs="+", required=True)
    p.set_defaults(handler=cmd_phi)

    p = sub.add_parser("discrepancy", parents=[common], help="Star discrepancy")
    p.add_argument("--alpha", default=None, help="Use frac(j * alpha), j = 1..count")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--input", default=None, help="File with one value in [0, 1) per line")
    p.set_defaults(handler=cmd_discrepancy)

    p = sub.add_parser("converge", parents=[common, truncation], help="Finite-n against limit counts")
    p.add_argument("--n-list", type=int, nargs="+", required=True, dest="n_list")
    p.add_argument("--theta", default="1")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--alpha", required=True)
    p.add_argument("--T", default="1")
    p.add_argument("--reps", type=int, default=10_000)
    p.set_defaults(handler=cmd_converge)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format='%(asctime)s - %(levelname)s - %(message)s', stream=sys.stderr)
    if args.bits < MIN_BITS:
        parser.error(f"--bits must be at least {MIN_BITS}")

    try:
        manifest = args.handler(args)
    except (PrecisionExhausted, TruncationTooSmall, ResourceLimitExceeded) as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_NUMERICAL
    except ValueError as e:
        logger.error(f"{args.command}: {e}")
        parser.error(str(e))
    manifest.write(args.output)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
