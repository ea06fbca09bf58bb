import importlib.util
from pathlib import Path

SCRIPTS = Path(__file__).resolve().parent.parent / "scripts"


def _load(name):
    spec = importlib.util.spec_from_file_location(name, SCRIPTS / f"{name}.py")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def test_lagrangian_sweep_rows_agree(tmp_path):
    mod = _load("lagrangian_sweep")
    rows = mod.sweep(mod.LagrangianSweepConfig(amplitudes=(0.05,), metrics_per_amplitude=1, points=2))
    assert len(rows) == 1 and rows[0]["max_rel_diff"] < 1e-7 and rows[0]["max_abs_W"] > 1e-4
    assert mod.main(["--amplitudes", "0.05", "--metrics", "1", "--points", "1", "--out", str(tmp_path / "s.csv")]) == 0
    assert (tmp_path / "s.csv").read_text().startswith("amplitude,")


def test_suite_sweep_reports_every_check(tmp_path):
    mod = _load("run_suites")
    table = mod.worst_by_check(mod.SuiteSweepConfig(suites=("forms",), seeds=(1,), samples=2))
    assert table and all(r["failures"] == 0 for r in table.values())
