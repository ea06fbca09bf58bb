import csv
import io
import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from twistgauge import cli
from twistgauge.cli import (EXIT_DEGENERATE, EXIT_FAIL, EXIT_IO, EXIT_OK, EXIT_USAGE, SpecError, main,
                            parse_metric_spec, write_atomic)
from twistgauge.jets import Coords
from twistgauge.suites import SAMPLES_ENV

SPECS = Path(__file__).resolve().parent.parent / "specs"


@pytest.fixture
def few_samples(monkeypatch):
    monkeypatch.setenv(SAMPLES_ENV, "3")


# -- metric-file parsing ------------------------------------------------------------------
def test_parse_symmetrizes_off_diagonal_entries():
    spec = parse_metric_spec("g00 = 1\ng11 = -1\ng22 = -1\ng33 = -1\ng01 = 0.1*x2\n")
    g = spec.metric().at(np.array([0.0, 0.0, 0.5, 0.0]))
    assert g[0, 1] == g[1, 0] == pytest.approx(0.05)


def test_polynomial_caret_is_power():
    spec = parse_metric_spec("g00 = 1 + x1^2\ng11 = -1\ng22 = -1\ng33 = -1\n")
    assert spec.metric().at(np.array([0.0, 0.3, 0.0, 0.0]))[0, 0] == pytest.approx(1.09)


def test_conformal_factor_scales_metric_quadratically():
    spec = parse_metric_spec("g00 = 1\ng11 = -1\ng22 = -1\ng33 = -1\nconformal_factor = 2\n")
    np.testing.assert_allclose(spec.metric().at(np.zeros(4)), 4 * np.diag([1.0, -1, -1, -1]))


def test_polynomial_evaluates_on_jets():
    p = cli.Polynomial("x0*x1 - 3", 4)
    j = p(Coords(np.array([2.0, 5.0, 0, 0]), 1))
    assert float(j.value) == pytest.approx(7.0)
    np.testing.assert_allclose(j.parts[1], [5.0, 2.0, 0, 0])


@pytest.mark.parametrize("text", [
    "g00 = 1\ng00 = 2\n",
    "g00 = __import__('os')\n",
    "g00 = exp(x0)\n",
    "g00 = x7\n",
    "dimension = 3\ng00 = 1\n",
    "signature = + + + +\ng00 = 1\n",
    "kind = spinor\ng00 = 1\n",
    "h00 = 1\n",
    "g01 = x0\ng10 = x1\ng00 = 1\n",
    "lower = 0 0 0 0\nupper = 0 1 1 1\ng00 = 1\n",
    "just some words\n",
    "# empty\n",
])
def test_malformed_specs_are_rejected(text):
    with pytest.raises(SpecError):
        parse_metric_spec(text)


# -- atomic output -----------------------------------------------------------------------
def test_atomic_write_replaces_and_leaves_no_temp(tmp_path):
    target = tmp_path / "out.txt"
    target.write_text("old")
    write_atomic(str(target), "new")
    assert target.read_text() == "new"
    assert os.listdir(tmp_path) == ["out.txt"]


def test_atomic_write_into_missing_directory_raises(tmp_path):
    with pytest.raises(OSError):
        write_atomic(str(tmp_path / "nope" / "out.txt"), "x")


# -- compute -----------------------------------------------------------------------------
def _compute(tmp_path, kind, spec, capsys, points=3, seed=1):
    out = tmp_path / f"{kind}.csv"
    code = main(["compute", "--kind", kind, "--metric", str(SPECS / spec), "--points", str(points),
                 "--seed", str(seed), "--out", str(out)])
    return code, out, capsys.readouterr()


def test_minkowski_blocks_are_zero(tmp_path, capsys):
    code, out, _ = _compute(tmp_path, "tractor", "minkowski.spec", capsys)
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert rows and max(abs(float(r["real"])) + abs(float(r["imag"])) for r in rows) < 1e-10
    assert {r["block"] for r in rows} >= {"f", "T", "W", "C"}


def test_twistor_compute_runs(tmp_path, capsys):
    code, out, _ = _compute(tmp_path, "twistor", "minkowski.spec", capsys, points=1)
    assert code == EXIT_OK
    assert out.read_text().startswith("point,x0,x1,x2,x3,block")


def test_lagrangians_agree_on_perturbed_metric(tmp_path, capsys):
    code, out, _ = _compute(tmp_path, "lagrangian", "perturbed.spec", capsys)
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == 3
    for r in rows:
        assert abs(float(r["L_weyl"])) > 1e-10
        for key in ("rel_tractor_twistor", "rel_tractor_weyl", "rel_twistor_weyl"):
            assert float(r[key]) < 1e-7


def test_compute_is_deterministic(tmp_path, capsys):
    _, a, _ = _compute(tmp_path, "lagrangian", "perturbed.spec", capsys, seed=5)
    first = a.read_text()
    _, b, _ = _compute(tmp_path, "lagrangian", "perturbed.spec", capsys, seed=5)
    assert b.read_text() == first


def test_degenerate_metric_exits_with_point(tmp_path, capsys):
    code, out, captured = _compute(tmp_path, "lagrangian", "degenerate.spec", capsys)
    assert code == EXIT_DEGENERATE
    assert "point" in captured.err
    assert not out.exists()


def test_missing_spec_is_io_error(tmp_path, capsys):
    assert main(["compute", "--kind", "tractor", "--metric", str(tmp_path / "missing.spec")]) == EXIT_IO


def test_bad_spec_is_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.spec"
    bad.write_text("g00 = x0 +\n")
    assert main(["compute", "--kind", "tractor", "--metric", str(bad)]) == EXIT_USAGE


def test_unwritable_output_is_io_error(tmp_path, capsys):
    code = main(["compute", "--kind", "tractor", "--metric", str(SPECS / "minkowski.spec"), "--points", "1",
                 "--out", str(tmp_path / "no" / "dir.csv")])
    assert code == EXIT_IO


def test_argparse_rejections_exit_two(capsys):
    for argv in (["verify", "--suite", "nonsense"], ["compute", "--kind", "x", "--metric", "m"],
                 ["compute", "--kind", "tractor", "--metric", "m", "--points", "0"], []):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == EXIT_USAGE


# -- verify ------------------------------------------------------------------------------
def _verify(tmp_path, *extra):
    report = tmp_path / "report.json"
    code = main(["verify", "--suite", "jets", "--report", str(report), *extra])
    return code, json.loads(report.read_text())


def test_verify_passes_and_writes_report(tmp_path, few_samples, capsys):
    code, data = _verify(tmp_path)
    assert code == EXIT_OK
    assert data["passed"] and data["suite"] == "jets" and data["sample_count"] == 3
    assert all(c["status"] == "pass" for c in data["checks"])
    out = capsys.readouterr().out
    assert out.count("PASS") == len(data["checks"])


def test_tolerance_override_is_recorded_and_can_fail(tmp_path, few_samples, capsys):
    code, data = _verify(tmp_path, "--tol", "1e-30")
    assert code == EXIT_FAIL
    assert data["tolerance_override"] == 1e-30
    assert all(c["tolerance"] == 1e-30 for c in data["checks"])
    assert not data["passed"]


def test_reports_are_reproducible(tmp_path, few_samples, capsys):
    a = _verify(tmp_path, "--seed", "9")[1]
    b = _verify(tmp_path, "--seed", "9")[1]
    a.pop("duration_s"), b.pop("duration_s")
    assert a == b


def test_invalid_sample_env_is_usage_error(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(SAMPLES_ENV, "zero")
    assert main(["verify", "--suite", "jets", "--report", str(tmp_path / "r.json")]) == EXIT_USAGE


def test_report_write_failure_is_io_error(tmp_path, few_samples, capsys):
    code = main(["verify", "--suite", "jets", "--report", str(tmp_path / "missing" / "r.json")])
    assert code == EXIT_IO


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "twistgauge", "verify", "--suite", "nonsense"],
                          capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == EXIT_USAGE
