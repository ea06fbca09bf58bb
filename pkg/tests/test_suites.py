import numpy as np
import pytest

from twistgauge import suites
from twistgauge.suites import SUITES, Check, checks_for, run_check, run_suite


def test_registry_ids_are_unique_and_prefixed():
    ids = [c.id for c in checks_for("all")]
    assert len(ids) == len(set(ids))
    for c in checks_for("all"):
        assert c.id.startswith(c.suite + ".")
        assert c.comparator in ("<=", ">=")
        assert c.anchor


def test_every_suite_has_checks():
    for s in SUITES:
        assert checks_for(s)
    with pytest.raises(KeyError):
        checks_for("nonsense")


@pytest.mark.parametrize("suite", SUITES)
def test_suite_passes_with_few_samples(suite):
    report = run_suite(suite, seed=3, samples=2)
    failed = [(r.check_id, r.max_abs_error, r.error) for r in report.records if r.status != "pass"]
    assert not failed


def test_crashing_check_is_recorded_as_failure():
    def boom(ctx):
        raise RuntimeError("kaboom")

    rec = run_check(Check("x.boom", "x", "always crashes", 1.0, boom), samples=1)
    assert rec.status == "fail" and rec.max_abs_error is None
    assert "kaboom" in rec.error


def test_non_finite_value_fails():
    rec = run_check(Check("x.nan", "x", "returns nan", 1.0, lambda ctx: float("nan")), samples=1)
    assert rec.status == "fail"


def test_lower_bound_comparator():
    low = run_check(Check("x.low", "x", "witness", 1e-6, lambda ctx: 1e-9, ">="), samples=1)
    high = run_check(Check("x.high", "x", "witness", 1e-6, lambda ctx: 1e-3, ">="), samples=1)
    assert (low.status, high.status) == ("fail", "pass")


def test_per_check_streams_are_independent_of_order():
    draws = {}

    def grab(name):
        def run(ctx):
            draws[name] = ctx.rng.random()
            return 0.0
        return run

    a, b = Check("x.a", "x", "a", 1.0, grab("a")), Check("x.b", "x", "b", 1.0, grab("b"))
    run_check(a), run_check(b)
    first = dict(draws)
    run_check(b), run_check(a)
    assert draws == first
    assert first["a"] != first["b"]


def test_default_samples_reads_environment(monkeypatch):
    monkeypatch.delenv(suites.SAMPLES_ENV, raising=False)
    assert suites.default_samples() == suites.DEFAULT_SAMPLES
    monkeypatch.setenv(suites.SAMPLES_ENV, "7")
    assert suites.default_samples() == 7
    monkeypatch.setenv(suites.SAMPLES_ENV, "0")
    with pytest.raises(ValueError):
        suites.default_samples()


def test_context_points_are_in_the_box():
    ctx = suites.Context(0, 5, np.random.default_rng(0))
    pts = ctx.points()
    assert pts.shape == (5, 4) and np.all(np.abs(pts) <= 0.5)
