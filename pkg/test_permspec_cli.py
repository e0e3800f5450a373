#!/usr/bin/env python3
"""
End-to-end tests of the permspec command line
"""

import json

import pandas as pd
import pytest

import permspec
from permspec import main


def run(argv):
    """Run the CLI and return its exit code."""
    return main(argv + ["--log-level", "WARNING"])


def test_gap_series_k1_json(tmp_path):
    out = tmp_path / "series.json"
    assert run(["gap-series", "--k", "1", "--order", "6", "-o", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["k"] == 1
    assert [c["value"] for c in payload["coeffs"]] == ["1", "1", "1/4", "1/36", "1/576", "1/14400", "1/518400"]
    manifest = json.loads((tmp_path / "series.json.manifest.json").read_text())
    assert manifest["command"] == "gap-series"
    assert manifest["schema_version"] == 1
    assert manifest["params"]["order"] == 6


def test_spectrum_csv_schema(tmp_path):
    out = tmp_path / "points.csv"
    assert run(["spectrum", "--n", "40", "--k", "1", "--alpha", "frac(sqrt2)", "--T", "3",
                "--samples", "10", "--seed", "7", "-o", str(out)]) == 0
    df = pd.read_csv(out, dtype={"position": str})
    assert list(df.columns) == ["replicate", "position", "multiplicity", "flag"]
    assert df["replicate"].between(0, 9).all()


def test_spectrum_of_given_cycle_type(capsys):
    assert run(["spectrum", "--n", "4", "--alpha", "1/2", "--T", "1", "--cycles", "4", "--out", "json"]) == 0
    records = json.loads(capsys.readouterr().out)
    assert records == [{"replicate": 0, "position": "0.0", "multiplicity": 1, "flag": 0}]


def test_invalid_alpha_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        run(["spectrum", "--n", "10", "--alpha", "3/0"])
    assert exc.value.code == 2


def test_domain_error_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        run(["phi", "--x", "0"])
    assert exc.value.code == 2


def test_truncation_failure_exit_code(tmp_path):
    out = tmp_path / "gap.json"
    assert run(["gap-mc", "--y2", "1", "--reps", "50", "--r", "2", "--tol", "1e-9", "-o", str(out)]) == 3


def test_pmf_single_and_all(capsys):
    assert run(["pmf", "--n", "3", "--cycles", "1,1,1"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["pmf"] == "1/6"
    assert record["cycles"] == {"1": 3}
    assert run(["pmf", "--n", "4", "--theta", "1/2"]) == 0
    records = json.loads(capsys.readouterr().out)
    assert len(records) == 5


def test_sample_writes_json_lines(tmp_path):
    out = tmp_path / "types.jsonl"
    assert run(["sample", "--n", "6", "--samples", "300", "--seed", "3", "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 300
    assert all(json.loads(line)["n"] == 6 for line in lines)


def test_discrepancy_of_golden_multiples(capsys):
    assert run(["discrepancy", "--alpha", "golden", "--count", "100"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert 0.01 < float(payload["discrepancy"]) < 0.05


def test_discrepancy_of_file(tmp_path, capsys):
    values = tmp_path / "values.txt"
    values.write_text("0\n1/2\n")
    assert run(["discrepancy", "--input", str(values)]) == 0
    assert json.loads(capsys.readouterr().out)["discrepancy"] == "1/2"


def test_phi_values(capsys):
    assert run(["phi", "--theta", "1", "--x", "1/2", "3/2"]) == 0
    records = json.loads(capsys.readouterr().out)
    assert [r["value"] for r in records] == ["1/2", "17/18"]


def test_limit_output_is_thread_independent(tmp_path, monkeypatch):
    monkeypatch.delenv("PERMSPEC_THREADS", raising=False)
    outputs = []
    for threads in ("1", "4", "8"):
        out = tmp_path / f"limit_{threads}.csv"
        assert run(["limit", "--k", "2", "--theta", "1", "--kind", "irr", "--window", "-1", "1",
                    "--reps", "700", "--seed", "11", "--threads", threads, "-o", str(out)]) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]


def test_converge_report(tmp_path):
    out = tmp_path / "converge.csv"
    assert run(["converge", "--n-list", "50", "200", "--alpha", "frac(sqrt2)", "--reps", "300",
                "--seed", "5", "-o", str(out)]) == 0
    df = pd.read_csv(out)
    assert df["n"].tolist() == [50, 200]
    assert df["tv_distance"].between(0, 1).all()
    assert df["chi2_p_value"].between(0, 1).all()


def test_converge_truncation_failure_exit_code(tmp_path):
    out = tmp_path / "converge.csv"
    assert run(["converge", "--n-list", "20", "--alpha", "frac(sqrt2)", "--reps", "20", "--r", "2",
                "--tol", "1e-12", "-o", str(out)]) == 3


def test_sample_large_n_skips_goodness_of_fit(tmp_path, monkeypatch):
    """Partitions of 90 are never enumerated; samples are still written."""
    def no_enumeration(n):
        raise AssertionError(f"enumerated cycle types of {n}")

    monkeypatch.setattr(permspec, "enumerate_cycle_types", no_enumeration)
    out = tmp_path / "types.jsonl"
    assert run(["sample", "--n", "90", "--samples", "10", "--seed", "2", "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 10
    assert all(json.loads(line)["n"] == 90 for line in lines)
    manifest = json.loads((tmp_path / "types.jsonl.manifest.json").read_text())
    assert manifest["truncation"] == {"chi2_p_value": None}
