"""Named verification suites: seeded property checks with tolerances.

Every check draws its data from a generator seeded by (seed, check id), so
results do not depend on which other checks run or in which order.  A check
returns one number: a max-abs residual compared with ``<=`` against its
tolerance, or for witness checks a magnitude compared with ``>=``.
"""
from __future__ import annotations

import os
import time
import zlib
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import brst as B
from . import cartan as K
from . import conformal as CF
from . import gauge as G
from . import lie
from .cocycle import (
    AbelianCocycle,
    MorphismCocycle,
    TractorCocycle,
    TwistorCocycle,
    catalog,
    constant_field,
    diff_at_identity,
    diff_at_identity_fd,
    double_cover_jet,
    evaluate,
    field_inverse,
    field_product,
    gauge_compose,
    id1_residual,
    k_conjugation,
)
from .forms import MUL, MetricField, exterior_derivative, form, hodge_star, wedge
from .jets import FieldHandle, fd_oracle, jexp, jlog, lift
from .samples import (
    random_algebra_field,
    random_connection_form,
    random_cstar_field,
    random_frame,
    random_group_field,
    random_polynomial,
    random_vector_form,
    random_weyl_field,
    sample_points,
)

__all__ = [
    "SAMPLES_ENV",
    "DEFAULT_SAMPLES",
    "DEFAULT_SEED",
    "SUITES",
    "Check",
    "Context",
    "CheckRecord",
    "SuiteReport",
    "checks_for",
    "default_samples",
    "run_check",
    "run_suite",
]

SAMPLES_ENV = "TWISTGAUGE_SAMPLES"
DEFAULT_SAMPLES = 20
DEFAULT_SEED = 42
SUITES = ("jets", "lie", "forms", "cocycle", "gauge", "mixed", "cartan", "conformal", "brst")
N = 4


def default_samples() -> int:
    raw = os.environ.get(SAMPLES_ENV)
    if raw is None or raw == "":
        return DEFAULT_SAMPLES
    value = int(raw)
    if value < 1:
        raise ValueError(f"{SAMPLES_ENV} must be a positive integer")
    return value


@dataclass(frozen=True)
class Context:
    seed: int
    samples: int
    rng: np.random.Generator

    def points(self, count: int | None = None, n: int = N, half_width: float = 0.5) -> np.ndarray:
        return sample_points(self.rng, self.samples if count is None else count, n, half_width)


@dataclass(frozen=True)
class Check:
    id: str
    suite: str
    anchor: str
    tolerance: float
    run: Callable[[Context], float]
    comparator: str = "<="
    samples: int | None = None


@dataclass
class CheckRecord:
    check_id: str
    anchor: str
    status: str
    max_abs_error: float | None
    tolerance: float
    comparator: str
    sample_count: int
    seed: int
    error: str | None = None


@dataclass
class SuiteReport:
    suite: str
    seed: int
    sample_count: int
    tolerance_override: float | None
    records: list = field(default_factory=list)
    duration_s: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.status == "pass" for r in self.records)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "sample_count": self.sample_count,
            "tolerance_override": self.tolerance_override,
            "passed": self.passed,
            "checks": [asdict(r) for r in self.records],
            "duration_s": self.duration_s,
        }


_REGISTRY: list[Check] = []


def _check(suite: str, cid: str, anchor: str, tol: float, comparator: str = "<=", samples: int | None = None):
    def deco(fn):
        _REGISTRY.append(Check(f"{suite}.{cid}", suite, anchor, tol, fn, comparator, samples))
        return fn

    return deco


def checks_for(suite: str) -> list[Check]:
    if suite == "all":
        return [c for s in SUITES for c in _REGISTRY if c.suite == s]
    if suite not in SUITES:
        raise KeyError(suite)
    return [c for c in _REGISTRY if c.suite == suite]


def run_check(check: Check, seed: int = DEFAULT_SEED, samples: int | None = None,
              tol_override: float | None = None) -> CheckRecord:
    count = check.samples or (default_samples() if samples is None else samples)
    rng = np.random.default_rng([seed, zlib.crc32(check.id.encode())])
    tol = check.tolerance if tol_override is None else tol_override
    try:
        value = float(check.run(Context(seed, count, rng)))
    except Exception as exc:  # a crashing check is a failed check, not a crashed run
        return CheckRecord(check.id, check.anchor, "fail", None, tol, check.comparator, count, seed,
                           f"{type(exc).__name__}: {exc}")
    ok = value <= tol if check.comparator == "<=" else value >= tol
    ok = ok and np.isfinite(value)
    return CheckRecord(check.id, check.anchor, "pass" if ok else "fail", value, tol, check.comparator, count, seed)


def run_suite(suite: str, seed: int = DEFAULT_SEED, samples: int | None = None,
              tol_override: float | None = None, on_record: Callable[[CheckRecord], None] | None = None) -> SuiteReport:
    checks = checks_for(suite)
    count = default_samples() if samples is None else samples
    report = SuiteReport(suite, seed, count, tol_override)
    start = time.perf_counter()
    for c in checks:
        rec = run_check(c, seed, count, tol_override)
        report.records.append(rec)
        if on_record is not None:
            on_record(rec)
    report.duration_s = time.perf_counter() - start
    return report


# -- shared helpers ------------------------------------------------------------------
def _diff(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0))


def _on(f, points) -> float:
    return G.max_abs_on(f, points)


@dataclass
class _Case:
    name: str
    cocycle: object
    rep_dim: int
    dtype: type
    gauge_field: Callable[[np.random.Generator], FieldHandle]
    mixed: bool = False

    def connection(self, rng, scale=0.3) -> G.ConnForm:
        return G.ConnForm(random_connection_form(self.cocycle.target, rng, N, scale=scale), self.cocycle, self.mixed)

    def matter(self, rng, k: int = 0) -> G.TensorialField:
        a = random_vector_form(rng, N, self.rep_dim, k, dtype=self.dtype)
        return G.TensorialField(a, G.VectorRep(self.rep_dim), self.cocycle, self.mixed)


def _twisted_cases(rng) -> list[_Case]:
    """One case per catalog cocycle."""
    cat = catalog(random_frame(rng))
    su, so = lie.su2(), lie.so13()
    return [
        _Case("morphism-su2", cat["morphism-su2"], 2, complex, lambda r: random_group_field(su, r, N)),
        _Case("morphism-lorentz", cat["morphism-lorentz"], 4, float,
              lambda r: random_group_field(so, r, N, scale=0.2)),
        _Case("tractor", cat["tractor"], 6, float, lambda r: random_weyl_field(r, N), True),
        _Case("twistor", cat["twistor"], 4, complex, lambda r: random_weyl_field(r, N), True),
        _Case("abelian", cat["abelian"], 1, complex, lambda r: random_cstar_field(r, N)),
    ]


def _mixed_cases(rng) -> list[tuple[_Case, Callable]]:
    e = random_frame(rng)
    so, sl = lie.so13(), lie.sl2c()
    return [
        (_Case("tractor", TractorCocycle(e), 6, float, lambda r: random_weyl_field(r, N), True),
         lambda r: random_group_field(so, r, N, scale=0.2)),
        (_Case("twistor", TwistorCocycle(e), 4, complex, lambda r: random_weyl_field(r, N), True),
         lambda r: random_group_field(sl, r, N, scale=0.2)),
    ]


# -- jets ------------------------------------------------------------------------------
def _fd_relative(ctx: Context, orders: tuple[int, ...]) -> float:
    worst = 0.0
    n = 3
    for _ in range(50):
        f = random_polynomial(ctx.rng, n, (), degree=5, terms=6, scale=0.5)
        x = ctx.rng.uniform(-0.5, 0.5, size=n)
        J = lift(f, x, 3)
        for k in orders:
            for mi in np.ndindex(*(n,) * k):
                if list(mi) != sorted(mi):
                    continue
                exact = J.partial(mi)
                approx = fd_oracle(f, x, mi)
                worst = max(worst, float(np.abs(exact - approx) / max(1.0, float(np.abs(exact)))))
    return worst


@_check("jets", "partials_vs_fd_order12", "jet partials against central differences, orders 1-2", 1e-6, samples=50)
def _jets_fd12(ctx):
    return _fd_relative(ctx, (1, 2))


@_check("jets", "partials_vs_fd_order3", "jet partials against central differences, order 3", 1e-4, samples=50)
def _jets_fd3(ctx):
    return _fd_relative(ctx, (3,))


@_check("jets", "exp_log_roundtrip", "log(exp(u)) = u on order-3 jets", 1e-10, samples=50)
def _jets_explog(ctx):
    worst = 0.0
    for _ in range(50):
        f = random_polynomial(ctx.rng, N, (), degree=3, terms=5, scale=0.4)
        J = lift(f, ctx.rng.uniform(-0.5, 0.5, N), 3)
        R = jlog(jexp(J))
        worst = max(worst, max(_diff(a, b) for a, b in zip(R.parts, J.parts)))
    return worst


@_check("jets", "schwarz_symmetry", "stored mixed partials are symmetric under index permutation", 0.0, samples=20)
def _jets_schwarz(ctx):
    worst = 0.0
    for _ in range(20):
        f = random_polynomial(ctx.rng, N, (), degree=4, terms=6)
        J = lift(f, ctx.rng.uniform(-0.5, 0.5, N), 3)
        worst = max(worst, _diff(J.parts[2], J.parts[2].T))
        p3 = J.parts[3]
        for perm in [(1, 0, 2), (0, 2, 1), (2, 1, 0)]:
            worst = max(worst, _diff(p3, p3.transpose(perm)))
    return worst


# -- lie -------------------------------------------------------------------------------
@_check("lie", "spin_determinant", "4 det(x̄) = xᵀηx on random vectors", 1e-12, samples=100)
def _lie_det(ctx):
    x = ctx.rng.normal(size=(100, 4))
    return max(abs(4 * np.linalg.det(lie.spin_iso(v)) - v @ lie.ETA @ v) for v in x)


def _spin_pairs(ctx, count=50):
    so = lie.so13()
    return [(so.random_algebra(ctx.rng, 1.0), so.random_algebra(ctx.rng, 1.0)) for _ in range(count)]


@_check("lie", "spin_killing_isometry", "trace form on so(1,3) equals the spin-normalized form on sl(2,C)", 1e-10,
        samples=50)
def _lie_killing(ctx):
    return max(abs(lie.killing(s, t) - lie.killing(lie.so_to_spin_alg(s), lie.so_to_spin_alg(t), "spin"))
               for s, t in _spin_pairs(ctx))


@_check("lie", "literal_killing_ratio", "the literal symmetrized-trace form is one quarter of the trace form",
        1e-10, samples=50)
def _lie_ratio(ctx):
    return max(abs(lie.killing(lie.so_to_spin_alg(s), lie.so_to_spin_alg(t), "hermitian") - 0.25 * lie.killing(s, t))
               for s, t in _spin_pairs(ctx))


_ROUNDTRIP_GROUPS = (lie.so13, lie.sl2c, lie.su2, lie.tractor_G_SO, lie.twistor_G_SL, lie.poincare)


@_check("lie", "exp_log_roundtrip", "log(exp(X)) = X in the matrix group catalog", 1e-10)
def _lie_explog(ctx):
    worst = 0.0
    for make in _ROUNDTRIP_GROUPS:
        grp = make()
        for _ in range(ctx.samples):
            X = grp.random_algebra(ctx.rng, 0.5)
            worst = max(worst, _diff(lie.log_grp(lie.exp_alg(X)), X))
    return worst


@_check("lie", "adjoint_series", "Ad of exp(X) equals the exponential series of ad X", 1e-10)
def _lie_adjoint(ctx):
    from math import factorial

    worst = 0.0
    for make in (lie.so13, lie.sl2c, lie.tractor_full):
        grp = make()
        for _ in range(ctx.samples):
            X, M = grp.random_algebra(ctx.rng, 0.3), grp.random_algebra(ctx.rng, 1.0)
            series, term = M.copy(), M.copy()
            for k in range(1, 30):
                term = X @ term - term @ X
                series = series + term / factorial(k)
            worst = max(worst, _diff(lie.adjoint(lie.exp_alg(X), M), series))
    return worst


def _grading_residual(split: K.CartanSplit) -> float:
    worst = 0.0
    amb = split.ambient
    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            for X in amb.level_basis(i):
                for Y in amb.level_basis(j):
                    br = X @ Y - Y @ X
                    if abs(i + j) > 1:
                        worst = max(worst, float(np.max(np.abs(br))))
                    else:
                        worst = max(worst, K.level_residual(br, split, i + j))
    return worst


@_check("lie", "tractor_grading", "tractor algebra brackets respect the |1|-grading", 1e-10, samples=1)
def _lie_grading_tractor(ctx):
    return _grading_residual(K.tractor_split())


@_check("lie", "twistor_grading", "twistor algebra brackets respect the |1|-grading", 1e-10, samples=1)
def _lie_grading_twistor(ctx):
    return _grading_residual(K.twistor_split())


# -- forms -----------------------------------------------------------------------------
def _matrix_one_form(rng, size=2):
    p = random_polynomial(rng, N, (N, size, size), 2, 4, 0.5)
    return form(1, N, (size, size), p)


@_check("forms", "leibniz", "d(a∧b) = da∧b + (−1)^p a∧db", 1e-10)
def _forms_leibniz(ctx):
    pts = ctx.points()
    a, b, c = (_matrix_one_form(ctx.rng) for _ in range(3))
    worst = 0.0
    for p_form, q_form in ((a, b), (wedge(a, b), c), (a, wedge(b, c))):
        sign = -1.0 if p_form.degree % 2 else 1.0
        lhs = exterior_derivative(wedge(p_form, q_form))
        rhs = wedge(exterior_derivative(p_form), q_form) + wedge(p_form, exterior_derivative(q_form)) * sign
        worst = max(worst, _on(lhs - rhs, pts))
    return worst


@_check("forms", "d_squared", "d∘d = 0", 1e-10)
def _forms_dd(ctx):
    a = _matrix_one_form(ctx.rng)
    return _on(exterior_derivative(exterior_derivative(a)), ctx.points())


@_check("forms", "repeated_vector", "a form evaluated on a repeated vector vanishes", 0.0)
def _forms_repeat(ctx):
    w = wedge(_matrix_one_form(ctx.rng), _matrix_one_form(ctx.rng))
    worst = 0.0
    for x in ctx.points():
        v, u = ctx.rng.normal(size=N), ctx.rng.normal(size=N)
        worst = max(worst, float(np.max(np.abs(w(x, v, v)))))
        w3 = wedge(w, _matrix_one_form(ctx.rng))
        worst = max(worst, float(np.max(np.abs(w3(x, v, u, v)))))
    return worst


@_check("forms", "hodge_linearity", "the Hodge star is pointwise linear over scalar functions", 1e-10)
def _forms_hodge(ctx):
    e = random_frame(ctx.rng, scale=0.05)
    g = CF.metric_from_vielbein(e)
    b1, b2 = (form(1, N, (), random_polynomial(ctx.rng, N, (N,), 2)) for _ in range(2))
    a = wedge(b1, b2, MUL)
    f = form(0, N, (), random_polynomial(ctx.rng, N, (), 2))
    lhs = hodge_star(wedge(f, a, MUL), g)
    rhs = wedge(f, hodge_star(a, g), MUL)
    return _on(lhs - rhs, ctx.points())


# -- cocycle ---------------------------------------------------------------------------
@_check("cocycle", "identity", "the cocycle maps the identity to the identity", 1e-12)
def _coc_identity(ctx):
    worst = 0.0
    for case in _twisted_cases(ctx.rng):
        c = case.cocycle
        one = constant_field(np.eye(c.source.dim, dtype=complex if c.source.kind == "complex" else float), N)
        for x in ctx.points():
            worst = max(worst, _diff(evaluate(c, x, one), np.eye(c.target.dim)))
    return worst


@_check("cocycle", "composition_coherence", "composing the transformation law with η then ξ equals once with ηξ",
        1e-9)
def _coc_coherence(ctx):
    worst = 0.0
    pts = ctx.points()
    for case in _twisted_cases(ctx.rng):
        c, make = case.cocycle, case.gauge_field
        gam, eta, xi = make(ctx.rng), make(ctx.rng), make(ctx.rng)
        ex = field_product(eta, xi)
        conj = field_product(field_inverse(ex), gam, ex)
        twice = c.moved(eta).moved(xi)
        for x in pts:
            worst = max(worst, _diff(evaluate(twice, x, conj), gauge_compose(c, x, gam, ex)))
    return worst


@_check("cocycle", "three_chart_gluing", "transition with g then g′ equals transition with gg′", 1e-9)
def _coc_gluing(ctx):
    worst = 0.0
    pts = ctx.points()
    for case in _twisted_cases(ctx.rng):
        A, a = case.connection(ctx.rng), case.matter(ctx.rng)
        g1, g2 = case.gauge_field(ctx.rng), case.gauge_field(ctx.rng)
        o1, o2, o12 = G.OverlapData(g1), G.OverlapData(g2), G.OverlapData(field_product(g1, g2))
        for X in (A, a):
            worst = max(worst, _on(G.glue(G.glue(X, o1), o2).form - G.glue(X, o12).form, pts))
    return worst


@_check("cocycle", "differential_vs_fd", "c(χ) equals the derivative of C(exp τχ) at τ = 0", 1e-7)
def _coc_diff(ctx):
    worst = 0.0
    e = random_frame(ctx.rng)
    pairs = [(TractorCocycle(e), lie.weyl_dilations()), (TwistorCocycle(e), lie.weyl_dilations()),
             (MorphismCocycle(lie.su2()), lie.su2()),
             (AbelianCocycle(v=np.array([0.3, -0.7, 0.2, 0.5]), q=2, lam=0.8), lie.cstar())]
    for c, grp in pairs:
        chi = random_algebra_field(grp, ctx.rng, N)
        for x in ctx.points():
            worst = max(worst, _diff(diff_at_identity(c, x, chi), diff_at_identity_fd(c, x, chi)))
    return worst


@_check("cocycle", "k_conjugation_routes", "moving the frame by S equals conjugating the cocycle value by S", 1e-10)
def _coc_k(ctx):
    worst = 0.0
    e = random_frame(ctx.rng)
    for c, k in ((TractorCocycle(e), lie.so13()), (TwistorCocycle(e), lie.sl2c())):
        z, S = random_weyl_field(ctx.rng, N), random_group_field(k, ctx.rng, N, scale=0.2)
        for x in ctx.points():
            worst = max(worst, _diff(k_conjugation(c, x, z, S, "frame"), k_conjugation(c, x, z, S, "conjugate")))
    return worst


@_check("cocycle", "commutator_identity", "mixed-partial commutator identity for morphism cocycles", 1e-9,
        samples=1)
def _coc_id1(ctx):
    worst = 0.0
    for grp, rho in ((lie.su2(), lambda M: M), (lie.so13(), lambda M: M), (lie.sl2c(), double_cover_jet)):
        for X in grp.basis:
            for Y in grp.basis:
                worst = max(worst, id1_residual(rho, X, Y))
    return worst


# -- gauge (twisted) ---------------------------------------------------------------------
def _over_cases(ctx, fn) -> float:
    pts = ctx.points()
    return max(fn(case, pts) for case in _twisted_cases(ctx.rng))


@_check("gauge", "right_action", "(A^γ)^η = A^{γη} for twisted connections", 1e-9)
def _g_right(ctx):
    def one(case, pts):
        A = case.connection(ctx.rng)
        g, h = case.gauge_field(ctx.rng), case.gauge_field(ctx.rng)
        lhs = G.transform_connection(G.transform_connection(A, g), h).form
        return _on(lhs - G.transform_connection(A, field_product(g, h)).form, pts)

    return _over_cases(ctx, one)


@_check("gauge", "curvature_covariance", "F^γ = C(γ)⁻¹ F C(γ)", 1e-9)
def _g_curv(ctx):
    def one(case, pts):
        A = case.connection(ctx.rng)
        g = case.gauge_field(ctx.rng)
        lhs = G.curvature(G.transform_connection(A, g)).form
        return _on(lhs - G.transform_tensorial(G.curvature(A), g).form, pts)

    return _over_cases(ctx, one)


@_check("gauge", "covariant_derivative_covariance", "(Da)^γ = ρ(C(γ))⁻¹ Da", 1e-9)
def _g_cov(ctx):
    def one(case, pts):
        A, a = case.connection(ctx.rng), case.matter(ctx.rng)
        g = case.gauge_field(ctx.rng)
        lhs = G.covariant_derivative(G.transform_connection(A, g), G.transform_tensorial(a, g)).form
        return _on(lhs - G.transform_tensorial(G.covariant_derivative(A, a), g).form, pts)

    return _over_cases(ctx, one)


@_check("gauge", "bianchi", "dF + [A, F] = 0", 1e-9)
def _g_bianchi(ctx):
    def one(case, pts):
        A = case.connection(ctx.rng)
        return _on(G.covariant_derivative(A, G.curvature(A)).form, pts)

    return _over_cases(ctx, one)


@_check("gauge", "second_covariant_derivative", "D²a = ρ*(F)a", 1e-9)
def _g_d2(ctx):
    def one(case, pts):
        A, a = case.connection(ctx.rng), case.matter(ctx.rng)
        D2 = G.covariant_derivative(A, G.covariant_derivative(A, a)).form
        return _on(D2 - G.rho_star_wedge(G.curvature(A), a), pts)

    return _over_cases(ctx, one)


_TAU = 1e-6


@_check("gauge", "infinitesimal_vs_finite", "δ_χ agrees with the finite-difference of finite transformations", 1e-5)
def _g_inf(ctx):
    def one(case, pts):
        A, a = case.connection(ctx.rng), case.matter(ctx.rng)
        chi = random_algebra_field(case.cocycle.source, ctx.rng, N)
        return max(_on(G.infinitesimal(X, chi) - G.finite_variation(X, chi, None, _TAU), pts) for X in (A, a))

    return _over_cases(ctx, one)


def _abelian_dressing_setup(ctx):
    ab = AbelianCocycle(v=np.array([0.3, -0.7, 0.2, 0.5]), q=2, lam=0.8)
    u1, u2 = random_cstar_field(ctx.rng, N), random_cstar_field(ctx.rng, N)
    part = G.PartitionOfUnity(boxes=[((-1.0,) * N, (0.3,) * N), ((-0.3,) * N, (1.0,) * N)])
    overlap = ctx.points(half_width=0.25)
    return ab, u1, u2, part, overlap


@_check("gauge", "dressing_flat", "single-chart abelian dressing connection is flat", 1e-9)
def _g_flat(ctx):
    ab, u1, u2, _, _ = _abelian_dressing_setup(ctx)
    pts = ctx.points()
    return max(_on(G.curvature(G.dressing_connection(ab, u)).form, pts) for u in (u1, u2))


@_check("gauge", "glued_dressing_curvature_witness", "two-chart glued dressing connection has nonzero curvature",
        1e-6, comparator=">=")
def _g_witness(ctx):
    ab, u1, u2, part, overlap = _abelian_dressing_setup(ctx)
    Gl = G.glued_dressing_connection(ab, [u1, u2], part, overlap)
    return _on(G.curvature(Gl).form, overlap)


@_check("gauge", "glued_dressing_curvature_tensorial", "glued dressing curvature transforms tensorially", 1e-9)
def _g_tensorial(ctx):
    ab, u1, u2, part, overlap = _abelian_dressing_setup(ctx)
    Gl = G.glued_dressing_connection(ab, [u1, u2], part, overlap)
    Om = G.curvature(Gl)
    g = random_cstar_field(ctx.rng, N)
    gi = field_inverse(g)
    moved = G.glued_dressing_connection(ab, [field_product(gi, u1), field_product(gi, u2)], part)
    return max(_on(G.curvature(moved).form - G.transform_tensorial(Om, g).form, overlap),
               _on(G.curvature(G.transform_connection(Gl, g)).form - G.transform_tensorial(Om, g).form, overlap))


# -- mixed -----------------------------------------------------------------------------
@_check("mixed", "order_independence", "(X^γ)^ζ = (X^ζ)^γ = X^{γζ} for X in {A, a, F}", 1e-9)
def _m_order(ctx):
    worst = 0.0
    pts = ctx.points()
    for case, kfield in _mixed_cases(ctx.rng):
        A, a = case.connection(ctx.rng), case.matter(ctx.rng)
        F = G.curvature(A)
        g, z = case.gauge_field(ctx.rng), kfield(ctx.rng)
        for X in (A, a, F):
            one = G.transform_mixed(X, g, z).form
            hk = G.transform_mixed(G.transform_mixed(X, g), None, z).form
            kh = G.transform_mixed(G.transform_mixed(X, None, z), g).form
            worst = max(worst, _on(one - hk, pts), _on(one - kh, pts))
    return worst


@_check("mixed", "k_only_yang_mills", "K-only transformation is the Yang-Mills transformation", 1e-12)
def _m_ym(ctx):
    worst = 0.0
    pts = ctx.points()
    for case, kfield in _mixed_cases(ctx.rng):
        A = case.connection(ctx.rng)
        S = kfield(ctx.rng)
        c = case.cocycle
        size = c.target.dim
        Z = FieldHandle(lambda X, S=S, c=c: c.embed_k(S(X)), N, S.depth)
        Zi = field_inverse(Z)
        Zf, Zif = G._zero_form_of(Z, (size, size)), G._zero_form_of(Zi, (size, size))
        ym = wedge(wedge(Zif, A.form), Zf) + wedge(Zif, exterior_derivative(Zf))
        worst = max(worst, _on(G.transform_mixed(A, None, S).form - ym, pts))
    return worst


@_check("mixed", "infinitesimal_vs_finite", "δ_χ + δ_υ agrees with the finite-difference of finite transformations",
        1e-5)
def _m_inf(ctx):
    worst = 0.0
    pts = ctx.points()
    for case, _ in _mixed_cases(ctx.rng):
        A, a = case.connection(ctx.rng), case.matter(ctx.rng)
        chi = random_algebra_field(case.cocycle.source, ctx.rng, N)
        ups = random_algebra_field(case.cocycle.k_group, ctx.rng, N)
        for X in (A, a):
            worst = max(worst, _on(G.infinitesimal(X, chi, ups) - G.finite_variation(X, chi, ups, _TAU), pts))
    return worst


# -- cartan ----------------------------------------------------------------------------
def _cartan_cases(ctx):
    e = random_frame(ctx.rng)
    return [
        (K.tractor_split(), TractorCocycle(e), lambda r: random_weyl_field(r, N)),
        (K.twistor_split(), TwistorCocycle(e), lambda r: random_weyl_field(r, N)),
        (K.poincare_split(), K.poincare_cocycle(), lambda r: random_group_field(lie.so13(), r, N, scale=0.2)),
    ]


@_check("cartan", "soldering_covariance", "the soldering form transforms tensorially", 1e-9)
def _k_solder(ctx):
    worst = 0.0
    pts = ctx.points()
    for split, coc, make in _cartan_cases(ctx):
        w = K.cartan_connection(random_connection_form(split.ambient, ctx.rng, N), split, coc)
        g = make(ctx.rng)
        wg = w.with_conn(G.transform_connection(w.conn, g))
        rhs = K.quotient_projection(split, G.transform_tensorial(K.soldering(w), g).form)
        worst = max(worst, _on(K.soldering(wg).form - rhs, pts))
    return worst


@_check("cartan", "torsion_covariance", "the torsion τ(Ω) transforms tensorially", 1e-9)
def _k_torsion(ctx):
    worst = 0.0
    pts = ctx.points()
    for split, coc, make in _cartan_cases(ctx):
        w = K.cartan_connection(random_connection_form(split.ambient, ctx.rng, N), split, coc)
        g = make(ctx.rng)
        wg = w.with_conn(G.transform_connection(w.conn, g))
        rhs = K.quotient_projection(split, G.transform_tensorial(G.curvature(w.conn), g).form)
        worst = max(worst, _on(K.torsion(wg).form - rhs, pts))
    return worst


@_check("cartan", "reductive_torsion", "for a reductive split τ(Ω) = dθ + [ω, θ]", 1e-10)
def _k_reductive(ctx):
    ps = K.poincare_split()
    w = K.cartan_connection(random_connection_form(ps.ambient, ctx.rng, N), ps, K.poincare_cocycle())
    return _on(K.torsion(w).form - K.reductive_torsion(w), ctx.points())


@_check("cartan", "grading_reassembly", "graded pieces of a parabolic connection sum back exactly", 1e-12)
def _k_grading(ctx):
    worst = 0.0
    pts = ctx.points()
    for split, coc, _ in _cartan_cases(ctx)[:2]:
        w = K.cartan_connection(random_connection_form(split.ambient, ctx.rng, N), split, coc)
        parts = K.grading_split(w, split)
        total = parts[-1] + parts[0] + parts[1]
        worst = max(worst, _on(total - w.form, pts))
        for lvl, piece in parts.items():
            for x in pts[:3]:
                worst = max(worst, max(K.level_residual(m, split, lvl) for m in piece.at(x)))
    return worst


@_check("cartan", "flat_model", "the flat Cartan connection has unit vielbein and vanishing curvature", 1e-12)
def _k_flat(ctx):
    worst = 0.0
    pts = ctx.points()
    for split, coc, _ in _cartan_cases(ctx)[:2]:
        fl = K.flat_connection(split, coc)
        worst = max(worst, _on(G.curvature(fl.conn).form, pts))
        worst = max(worst, max(_diff(lift(K.vielbein_of(fl), x).value, np.eye(4)) for x in pts))
    return worst


@_check("cartan", "injectivity_detection", "degenerate soldering is flagged exactly where the frame is singular",
        0.0)
def _k_inject(ctx):
    from .jets import stack

    deg = FieldHandle(lambda X: stack([X[0] * np.array([1.0, 0, 0, 0])] + [X.const(np.eye(4)[i]) for i in range(1, 4)]),
                      4)
    pts = ctx.points()
    pts[: max(1, len(pts) // 4), 0] = 0.0
    rep = K.check_injectivity(deg, pts)
    flagged = {tuple(np.asarray(p)) for p in rep.failing_points}
    expected = {tuple(p) for p in pts if p[0] == 0.0}
    return float(len(flagged ^ expected))


# -- conformal -------------------------------------------------------------------------
def _perturbed_frames(ctx, count=3, scale=0.05):
    return [random_frame(ctx.rng, scale=scale) for _ in range(count)]


def _conformally_flat_metric(ctx) -> MetricField:
    phi = random_polynomial(ctx.rng, N, (), 2, 4, 0.15)
    return MetricField.from_fn(lambda X: jexp(phi(X) * 2.0) * lie.ETA)


@_check("conformal", "minkowski_blocks_vanish", "tractor and twistor curvature blocks vanish on Minkowski space",
        1e-10)
def _cf_mink(ctx):
    e = FieldHandle(lambda X: X.const(np.eye(4)), 4)
    T = CF.tractor_connection(e)
    Tb = CF.twistor_connection(e, tractor=T)
    pts = ctx.points()
    blocks = CF.curvature_blocks(T)
    tw = CF.twistor_curvature_blocks(Tb)
    return max(_on(f, pts) for f in (blocks.f, blocks.T, blocks.W, blocks.C, tw.full))


@_check("conformal", "normalization_conditions", "standard construction has f = 0, 𝖳 = 0 and Ricc(𝖶) = 0", 1e-6)
def _cf_norm(ctx):
    worst = 0.0
    pts = ctx.points()
    frames = _perturbed_frames(ctx, 2)
    g = MetricField.from_fn(lambda X, e=random_frame(ctx.rng, scale=0.05): CF.metric_from_vielbein(e)(X))
    frames.append(CF.vielbein_from_metric(g))
    for e in frames:
        B_ = CF.curvature_blocks(CF.tractor_connection(e))
        worst = max(worst, _on(B_.f, pts), _on(B_.T, pts), _on(CF.weyl_trace(B_.W, e), pts))
    return worst


@_check("conformal", "weyl_block_oracle", "the 𝖶 block equals the Weyl tensor computed from the Riemann tensor",
        1e-6)
def _cf_weyl(ctx):
    worst = 0.0
    pts = ctx.points()
    for e in _perturbed_frames(ctx, 2):
        T = CF.tractor_connection(e)
        W = CF.curvature_blocks(T).W
        Wo = CF.weyl_oracle(T.metric)
        for x in pts:
            ev = e.at(x)
            conv = np.einsum("ar,rsmn,sb->mnab", ev, Wo.at(x), np.linalg.inv(ev))
            worst = max(worst, _diff(conv, W.at(x)))
    return worst


@_check("conformal", "conformally_flat", "𝖶 = 𝖢 = 0 for conformally flat metrics", 1e-6)
def _cf_flat(ctx):
    g = _conformally_flat_metric(ctx)
    e = CF.vielbein_from_metric(g)
    T = CF.tractor_connection(e)
    B_ = CF.curvature_blocks(T)
    pts = ctx.points()
    oracle = CF.weyl_oracle(g)
    return max(_on(B_.W, pts), _on(B_.C, pts), max(float(np.max(np.abs(oracle.at(x)))) for x in pts))


@_check("conformal", "twistor_image", "the twistor connection and curvature are the spin images of the tractor ones",
        1e-10)
def _cf_phi(ctx):
    e = random_frame(ctx.rng, scale=0.05)
    T = CF.tractor_connection(e)
    Tb = CF.twistor_connection(e)
    pts = ctx.points()
    Om, Omb = G.curvature(T.connection).form, G.curvature(Tb.connection).form
    return max(_on(Tb.varpi - CF.tractor_to_twistor_form(T.varpi), pts),
               _on(Omb - CF.tractor_to_twistor_form(Om), pts))


@_check("conformal", "weyl_covariance", "Weyl rescaling gives e ↦ ze and conjugates the curvature by C(z)", 1e-8)
def _cf_weylcov(ctx):
    worst = 0.0
    pts = ctx.points()
    e = random_frame(ctx.rng, scale=0.05)
    z = random_weyl_field(ctx.rng, N)
    ez = FieldHandle(lambda X: z(X)[0, 0] * e(X), N, 0)
    T = CF.tractor_connection(e)
    Tz = CF.tractor_connection(ez)
    for data, rebuilt in ((T, Tz), (CF.twistor_connection(e, tractor=T), CF.twistor_connection(ez, tractor=Tz))):
        wc = CF.weyl_covariance(data, z)
        worst = max(worst, _on(wc["curvature"].form - wc["conjugated_curvature"].form, pts))
        worst = max(worst, _on(rebuilt.varpi - wc["varpi"].form, pts))
    worst = max(worst, max(_diff(CF.weyl_covariance(T, z)["varpi"].at(x)[:, 1:5, 0], (z.at(x)[0, 0] * e.at(x)).T)
                           for x in pts))
    return worst


@_check("conformal", "lorentz_commutation", "Weyl and Lorentz/spin transformations commute", 1e-8)
def _cf_lorentz(ctx):
    worst = 0.0
    pts = ctx.points()
    e = random_frame(ctx.rng, scale=0.05)
    z = random_weyl_field(ctx.rng, N)
    T = CF.tractor_connection(e)
    Tb = CF.twistor_connection(e, tractor=T)
    for data, grp in ((T, lie.so13()), (Tb, lie.sl2c())):
        S = random_group_field(grp, ctx.rng, N, scale=0.2)
        lc = CF.lorentz_covariance(data, S, z)
        worst = max(worst, _on(lc["z_then_S"].form - lc["S_then_z"].form, pts),
                    _on(lc["one_shot"].form - lc["S_then_z"].form, pts))
    return worst


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


@_check("conformal", "lagrangian_identity",
        "tractor, twistor and Weyl Lagrangians agree for non-conformally-flat metrics", 1e-7, samples=10)
def _cf_lag(ctx):
    worst = 0.0
    pts = ctx.points()
    for e in _perturbed_frames(ctx, 3, scale=0.1):
        T = CF.tractor_connection(e)
        L = CF.lagrangian_conformal(T, CF.twistor_connection(e, tractor=T))
        if _on(CF.curvature_blocks(T).W, pts) <= 1e-6:
            raise ValueError("test metric is conformally flat on the sample")
        for x in pts:
            a, b, c = L.at(x)
            worst = max(worst, _rel(a, b), _rel(a, c), _rel(b, c))
    return worst


@_check("conformal", "matter_lagrangian_invariance", "matter Lagrangian is invariant under Weyl and Lorentz moves",
        1e-9)
def _cf_matter(ctx):
    from .cocycle import TractorCocycle as _TC

    e = random_frame(ctx.rng, scale=0.05)
    c = _TC(e)
    A = G.ConnForm(random_connection_form(c.target, ctx.rng, N, scale=0.2), c, True)
    phi = G.TensorialField(random_vector_form(ctx.rng, N, 6), G.VectorRep(6), c, True)
    U = lambda s: s * 0.3 + s * s * 0.1
    gm = MetricField.minkowski()
    z, S = random_weyl_field(ctx.rng, N), random_group_field(lie.so13(), ctx.rng, N, scale=0.2)
    L = CF.lagrangian_matter(A, phi, U, gm, lie.H_TRACTOR)
    L2 = CF.lagrangian_matter(G.transform_mixed(A, z, S), G.transform_mixed(phi, z, S), U, gm, lie.H_TRACTOR)
    return max(abs(complex(L.at(x)) - complex(L2.at(x))) for x in ctx.points())


# -- brst ------------------------------------------------------------------------------
def _brst_twisted(ctx):
    """so(1,3) morphism sector with six ghost generators, and the tractor W sector with one."""
    out = []
    so = lie.so13()
    m = MorphismCocycle(so)
    A = G.ConnForm(random_connection_form(so, ctx.rng, N), m)
    chis = [random_algebra_field(so, ctx.rng, N) for _ in range(so.alg_dim)]
    phi = random_vector_form(ctx.rng, N, 4)
    out.append((A, chis, B.BrstSystem.build(A.form, phi, G.curvature(A).form, B.ghost_components(m, chis))))
    c = TractorCocycle(random_frame(ctx.rng), mixed=False)
    A = G.ConnForm(random_connection_form(c.target, ctx.rng, N), c)
    chis = [random_algebra_field(c.source, ctx.rng, N)]
    phi = random_vector_form(ctx.rng, N, 6)
    out.append((A, chis, B.BrstSystem.build(A.form, phi, G.curvature(A).form, B.ghost_components(c, chis))))
    return out


def _brst_mixed(ctx):
    c = TractorCocycle(random_frame(ctx.rng))
    A = G.ConnForm(random_connection_form(c.target, ctx.rng, N), c, True)
    chis = [random_algebra_field(c.source, ctx.rng, N)]
    ups = [random_algebra_field(c.k_group, ctx.rng, N) for _ in range(c.k_group.alg_dim)]
    phi = random_vector_form(ctx.rng, N, 6)
    sysm = B.BrstSystem.build(A.form, phi, G.curvature(A).form, B.ghost_components(c, chis),
                              B.k_ghost_components(c, ups))
    return A, phi, chis, ups, sysm


def _composites(mixed: bool):
    A, F, phi, c = B.atom("A", 1), B.atom("F", 2), B.atom("phi", 0, 0, "vector"), B.ghost("c")
    out = [A, F, phi, c, A * A, A * phi, c * phi, B.bracket(A, c)]
    if mixed:
        # the tractor ghost already carries one derivative, so dA·φ would need order-4 jets
        v = B.ghost("v")
        out += [v, B.bracket(c, v), v * phi]
    else:
        out.append(B.d(A) * phi)
    return out


@_check("brst", "nilpotency_twisted", "s² = 0 on A, F, φ and c", 1e-10)
def _b_nil_tw(ctx):
    pts = ctx.points()
    return max(max(B.check_nilpotency(sysm, B.twisted_rules(), pts).residuals.values())
               for _, _, sysm in _brst_twisted(ctx))


@_check("brst", "nilpotency_mixed", "s² = 0 on A, F, φ, c and υ", 1e-10)
def _b_nil_mx(ctx):
    *_, sysm = _brst_mixed(ctx)
    return max(B.check_nilpotency(sysm, B.mixed_rules(), ctx.points()).residuals.values())


def _total_square(x, rules):
    ds = lambda e: B.d(e) + B.brst(e, rules)
    return ds(ds(x))


@_check("brst", "total_differential_square", "(d + s)² = 0 on fields, ghosts and polynomial composites", 1e-10)
def _b_total(ctx):
    pts = ctx.points(count=min(ctx.samples, 8))
    worst = 0.0
    for _, _, sysm in _brst_twisted(ctx)[:1]:
        for x in _composites(False):
            worst = max(worst, B.evaluate(_total_square(x, B.twisted_rules()), sysm).max_abs(pts))
    *_, sysm = _brst_mixed(ctx)
    for x in _composites(True):
        worst = max(worst, B.evaluate(_total_square(x, B.mixed_rules()), sysm).max_abs(pts))
    return worst


@_check("brst", "anticommutation", "sd + ds = 0", 1e-10)
def _b_anti(ctx):
    pts = ctx.points(count=min(ctx.samples, 8))
    *_, sysm = _brst_mixed(ctx)
    R = B.mixed_rules()
    return max(B.evaluate(B.brst(B.d(x), R) + B.d(B.brst(x, R)), sysm).max_abs(pts) for x in _composites(True))


@_check("brst", "sector_relations", "s_υ c = −[c, υ] and s_χ υ = 0", 1e-10)
def _b_sector(ctx):
    pts = ctx.points()
    *_, sysm = _brst_mixed(ctx)
    R = B.mixed_rules()
    c, v = B.ghost("c"), B.ghost("v")
    sc = B.evaluate(B.brst(c, R), sysm)
    sv = B.evaluate(B.brst(v, R), sysm)
    lhs = sc.restrict(sysm.k_generators) + B.evaluate(B.bracket(c, v), sysm)
    return max(lhs.max_abs(pts), sv.restrict(sysm.h_generators).max_abs(pts))


@_check("brst", "curvature_rule_consistency", "s applied to dA + A² reproduces the rule for sF", 1e-10)
def _b_curv(ctx):
    pts = ctx.points()
    *_, sysm = _brst_mixed(ctx)
    R = B.mixed_rules()
    A = B.atom("A", 1)
    derived = B.evaluate(B.brst(B.d(A) + A * A, R), sysm)
    return (derived - B.evaluate(R["F"], sysm)).max_abs(pts)


@_check("brst", "gauge_consistency", "generator-linear part of s reproduces the infinitesimal gauge variation",
        1e-9)
def _b_gauge(ctx):
    pts = ctx.points()
    A, phi, chis, ups, sysm = _brst_mixed(ctx)
    R = B.mixed_rules()
    a = G.TensorialField(phi, G.VectorRep(6), A.cocycle, True)
    sA = B.evaluate(B.brst(B.atom("A", 1), R), sysm)
    sphi = B.evaluate(B.brst(B.atom("phi", 0, 0, "vector"), R), sysm)
    worst = 0.0
    for i, chi in enumerate(chis):
        worst = max(worst, _on(sA.coefficient((i,), 1) - G.infinitesimal(A, chi), pts),
                    _on(sphi.coefficient((i,), 0) - G.infinitesimal(a, chi), pts))
    for j, u in enumerate(ups):
        k = sysm.k_generators[j]
        worst = max(worst, _on(sA.coefficient((k,), 1) - G.infinitesimal(A, None, u), pts),
                    _on(sphi.coefficient((k,), 0) - G.infinitesimal(a, None, u), pts))
    for Acon, chis_t, sysm_t in _brst_twisted(ctx):
        sA = B.evaluate(B.brst(B.atom("A", 1), B.twisted_rules()), sysm_t)
        for i, chi in enumerate(chis_t):
            worst = max(worst, _on(sA.coefficient((i,), 1) - G.infinitesimal(Acon, chi), pts))
    return worst


@_check("brst", "ghost_degree", "every s output has ghost degree one higher than its input", 0.0, samples=1)
def _b_degree(ctx):
    R = B.mixed_rules()
    bad = 0
    for x in _composites(True):
        y = B.brst(x, R)
        bad += int(y.ghost_degree != x.ghost_degree + 1)
    return float(bad)
