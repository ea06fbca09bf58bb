"""Acceptance criteria, each mapped onto registered suite checks.

Every criterion runs its checks with the stated sample counts and
tolerances, and appends one PASS/FAIL line to ``SUMMARY``; the conftest
hook prints those lines at the end of the pytest run.  Running this file
directly prints the same lines and exits non-zero on any failure.
"""

import sys
from dataclasses import dataclass

import numpy as np
import pytest

from twistgauge import lie
from twistgauge.suites import DEFAULT_SEED, checks_for, default_samples, run_check

MIN_POINTS = 20


@dataclass(frozen=True)
class Criterion:
    number: int
    title: str
    tolerances: dict  # check id -> tolerance the criterion demands


CRITERIA = [
    Criterion(1, "cocycle coherence and three-chart gluing at 20 points", {
        "cocycle.composition_coherence": 1e-9,
        "cocycle.three_chart_gluing": 1e-9,
    }),
    Criterion(2, "twisted connection laws", {
        "gauge.right_action": 1e-9,
        "gauge.curvature_covariance": 1e-9,
        "gauge.covariant_derivative_covariance": 1e-9,
        "gauge.bianchi": 1e-9,
        "gauge.second_covariant_derivative": 1e-9,
    }),
    Criterion(3, "mixed laws and K-only Yang-Mills reduction", {
        "mixed.order_independence": 1e-9,
        "mixed.k_only_yang_mills": 1e-12,
    }),
    Criterion(4, "infinitesimal variations and BRST nilpotency", {
        "gauge.infinitesimal_vs_finite": 1e-5,
        "mixed.infinitesimal_vs_finite": 1e-5,
        "brst.nilpotency_twisted": 1e-10,
        "brst.nilpotency_mixed": 1e-10,
        "brst.total_differential_square": 1e-10,
    }),
    Criterion(5, "tractor/twistor construction and Weyl oracle", {
        "conformal.minkowski_blocks_vanish": 1e-10,
        "conformal.normalization_conditions": 1e-6,
        "conformal.weyl_block_oracle": 1e-6,
        "conformal.conformally_flat": 1e-6,
    }),
    Criterion(6, "Weyl covariance and Lorentz/spin commutation", {
        "conformal.weyl_covariance": 1e-8,
        "conformal.lorentz_commutation": 1e-8,
    }),
    Criterion(7, "conformal-gravity Lagrangians agree (relative)", {
        "conformal.lagrangian_identity": 1e-7,
    }),
    Criterion(8, "spin bridge determinant and Killing isometry", {
        "lie.spin_determinant": 1e-12,
        "lie.spin_killing_isometry": 1e-10,
    }),
    Criterion(9, "dressing connections: flat, curved witness, tensorial", {
        "gauge.dressing_flat": 1e-9,
        "gauge.glued_dressing_curvature_witness": 1e-6,
        "gauge.glued_dressing_curvature_tensorial": 1e-9,
    }),
    Criterion(10, "jet partials against finite differences; exp/log round trips", {
        "jets.partials_vs_fd_order12": 1e-6,
        "jets.partials_vs_fd_order3": 1e-4,
        "jets.exp_log_roundtrip": 1e-10,
        "lie.exp_log_roundtrip": 1e-10,
    }),
]

REQUIRED_SAMPLES = {
    "conformal.lagrangian_identity": 10,
    "lie.spin_determinant": 100,
    "lie.spin_killing_isometry": 50,
    "jets.partials_vs_fd_order12": 50,
    "jets.partials_vs_fd_order3": 50,
}

SUMMARY: list[str] = []
_BY_ID = {c.id: c for c in checks_for("all")}


def _stricter_or_equal(check, demanded: float) -> bool:
    # a lower-bound witness must not be weaker than the demanded floor
    return check.tolerance >= demanded if check.comparator == ">=" else check.tolerance <= demanded


def evaluate(criterion: Criterion, seed: int = DEFAULT_SEED):
    samples = max(default_samples(), MIN_POINTS)
    records, problems = [], []
    for cid, demanded in criterion.tolerances.items():
        check = _BY_ID[cid]
        if not _stricter_or_equal(check, demanded):
            problems.append(f"{cid} registered at {check.tolerance:g}, looser than {demanded:g}")
        if cid in REQUIRED_SAMPLES and check.samples != REQUIRED_SAMPLES[cid]:
            problems.append(f"{cid} uses {check.samples} samples, needs {REQUIRED_SAMPLES[cid]}")
        rec = run_check(check, seed, samples)
        records.append(rec)
        if rec.status != "pass":
            problems.append(f"{cid} = {rec.max_abs_error} ({rec.error or 'over tolerance'})")
    worst = ", ".join(f"{r.check_id}={r.max_abs_error:.1e}" if r.max_abs_error is not None
                      else f"{r.check_id}=error" for r in records)
    line = f"{'PASS' if not problems else 'FAIL'} criterion {criterion.number}: {criterion.title} [{worst}]"
    return line, problems


def literal_killing_ratio(count: int = 50, seed: int = DEFAULT_SEED) -> float:
    """Mean of B̄_hermitian(x̄, ȳ) / B(x, y) over random so(1,3) pairs."""
    rng = np.random.default_rng(seed)
    so = lie.so13()
    ratios = []
    for _ in range(count):
        s, t = so.random_algebra(rng, 1.0), so.random_algebra(rng, 1.0)
        b = lie.killing(s, t)
        if abs(b) > 1e-3:
            ratios.append(lie.killing(lie.so_to_spin_alg(s), lie.so_to_spin_alg(t), "hermitian") / b)
    return float(np.real(np.mean(ratios)))


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{c.number}" for c in CRITERIA])
def test_criterion(criterion):
    line, problems = evaluate(criterion)
    if criterion.number == 8:
        line += f" literal Killing ratio {literal_killing_ratio():.12f}"
    SUMMARY.append(line)
    print(line)
    assert not problems, "; ".join(problems)


def test_unscaled_killing_form_is_a_quarter():
    ratio = literal_killing_ratio()
    SUMMARY.append(f"INFO literal hermitian-trace Killing form / trace form = {ratio:.12f} (spin convention rescales by 4)")
    assert ratio == pytest.approx(0.25, abs=1e-10)


if __name__ == "__main__":
    failed = 0
    for c in CRITERIA:
        line, problems = evaluate(c)
        print(line, flush=True)
        for p in problems:
            print(f"    {p}")
        failed += bool(problems)
    print(f"literal Killing ratio: {literal_killing_ratio():.12f}")
    sys.exit(1 if failed else 0)
