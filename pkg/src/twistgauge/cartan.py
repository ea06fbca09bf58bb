"""Twisted and mixed Cartan connections on a chart.

A Cartan connection ϖ takes values in a big algebra Lie G′ that splits as
a subalgebra (the gauge directions) plus a fixed complement spanned by
quotient representatives u_a.  τ is the linear projection onto the
complement, and the soldering form θ = τ(ϖ) has coefficients e^a_μ.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import lie
from .cocycle import LocalCocycle, MorphismCocycle
from .errors import DegenerateSoldering, GradingError, ShapeMismatch
from .forms import LocalForm, MetricField, constant_form, exterior_derivative, wedge, wedge_bracket
from .gauge import AdjointRep, ConnForm, TensorialField, curvature
from .jets import FieldHandle, Jet, einsum, lift
from .lie import ETA, SIGMA, GroupSpec

__all__ = [
    "CartanSplit",
    "CartanConn",
    "InjectivityReport",
    "tractor_split",
    "twistor_split",
    "poincare_split",
    "lorentz_in_poincare",
    "poincare_cocycle",
    "cartan_connection",
    "flat_connection",
    "quotient_projection",
    "soldering",
    "soldering_components",
    "vielbein_of",
    "check_injectivity",
    "metric_from_soldering",
    "torsion",
    "reductive_torsion",
    "grading_split",
    "level_residual",
]


@dataclass(frozen=True, eq=False)
class CartanSplit:
    """Lie G′ = subalgebra ⊕ span{u_a}, optionally graded.

    ``weights`` are the diagonal entries of a grading element; the level of
    matrix entry (r, c) is ``weights[r] − weights[c]``.
    """

    name: str
    ambient: GroupSpec
    sub: GroupSpec
    quotient: np.ndarray
    kind: str | None = None
    weights: tuple | None = None

    def __post_init__(self):
        q = np.asarray(self.quotient)
        object.__setattr__(self, "quotient", q)
        if self.ambient.alg_dim != self.sub.alg_dim + q.shape[0]:
            raise ShapeMismatch(f"{self.name}: dim G′ = {self.ambient.alg_dim} but subalgebra + quotient = "
                                f"{self.sub.alg_dim} + {q.shape[0]}")
        full = lie._realify(np.concatenate([self.sub.basis, q]).astype(complex))
        if np.linalg.matrix_rank(full, tol=1e-10) != full.shape[1]:
            raise ShapeMismatch(f"{self.name}: quotient basis does not complement the subalgebra")
        for u in q:
            if not self.ambient.in_algebra(u, 1e-10):
                raise ShapeMismatch(f"{self.name}: quotient representative outside Lie G′")

    @property
    def dim(self) -> int:
        return self.quotient.shape[0]

    @property
    def size(self) -> int:
        return self.ambient.dim

    @property
    def _maps(self):
        return _coefficient_maps(self)

    def coefficients(self, J: Jet) -> Jet:
        """Quotient coefficients (…, m) of a matrix jet (…, N, N)."""
        pre, pim = self._maps
        out = einsum("...kl,klc->...c", J.real, pre)
        if np.iscomplexobj(J.value):
            out = out + einsum("...kl,klc->...c", J.imag, pim)
        return out

    def tau(self, J: Jet) -> Jet:
        c = self.coefficients(J)
        return einsum("...c,ckl->...kl", c, self.quotient)

    def tau_array(self, M: np.ndarray) -> np.ndarray:
        pre, pim = self._maps
        M = np.asarray(M)
        c = np.einsum("...kl,klc->...c", M.real, pre) + np.einsum("...kl,klc->...c", M.imag, pim)
        return np.einsum("...c,ckl->...kl", c, self.quotient)

    def level_mask(self, level: int) -> np.ndarray:
        if self.weights is None:
            raise GradingError(f"{self.name}: no grading declared")
        w = np.asarray(self.weights, float)
        return (np.abs(w[:, None] - w[None, :] - level) < 1e-12).astype(float)

    @property
    def levels(self) -> list[int]:
        if self.weights is None:
            raise GradingError(f"{self.name}: no grading declared")
        return sorted(set(int(g) for g in self.ambient.grading))


@lru_cache(maxsize=None)
def _coefficient_maps(split: CartanSplit):
    full = np.concatenate([split.sub.basis, split.quotient]).astype(complex)
    b = lie._realify(full)  # (2 N², m_total)
    pinv = np.linalg.pinv(b)[split.sub.alg_dim:]  # (m, 2 N²)
    N = split.size
    pre = pinv[:, : N * N].T.reshape(N, N, -1)
    pim = pinv[:, N * N :].T.reshape(N, N, -1)
    return pre, pim


def _tractor_quotient():
    return np.array(lie._tau_basis())


@lru_cache(maxsize=None)
def tractor_split() -> CartanSplit:
    """so(2,4) over Lie(G⋊SO); u_a are the lower-left τ generators."""
    return CartanSplit("tractor", lie.tractor_full(), lie.tractor_G_SO(), _tractor_quotient(), "parabolic",
                       (1, 0, 0, 0, 0, -1))


@lru_cache(maxsize=None)
def twistor_split() -> CartanSplit:
    """su(2,2) over Lie(Ḡ⋊SL); u_a = i σ_a in the lower-left block (images of the tractor u_a)."""
    q = []
    for a in range(4):
        m = np.zeros((4, 4), dtype=complex)
        m[2:, :2] = 1j * SIGMA[a]
        q.append(m)
    return CartanSplit("twistor", lie.twistor_full(), lie.twistor_G_SL(), np.array(q), "parabolic",
                       (0.5, 0.5, -0.5, -0.5))


@lru_cache(maxsize=None)
def lorentz_in_poincare() -> GroupSpec:
    lor = np.array([lie.lorentz_embed(b, 5, algebra=True) for b in lie._lorentz_basis()])

    def member(M, tol):
        M = np.real(M)
        emb = np.eye(5)
        emb[:4, :4] = M[:4, :4]
        return lie._is_lorentz(M[:4, :4], tol) and np.max(np.abs(M - emb)) <= tol

    return GroupSpec("SO(1,3) in ISO(1,3)", 5, "real", lor, member)


@lru_cache(maxsize=None)
def poincare_split() -> CartanSplit:
    """Reductive split of iso(1,3): Lorentz ⊕ translations."""
    trans = np.array([lie._E(5, a, 4) for a in range(4)])
    return CartanSplit("poincare", lie.poincare(), lorentz_in_poincare(), trans, "reductive", None)


def poincare_cocycle() -> MorphismCocycle:
    """Lorentz gauge fields acting on ISO(1,3)-valued forms through the 5×5 embedding."""

    def rho(S):
        if isinstance(S, Jet):
            basis = np.zeros((4, 4, 5, 5))
            for a in range(4):
                for b in range(4):
                    basis[a, b, a, b] = 1
            corner = np.zeros((5, 5))
            corner[4, 4] = 1
            return einsum("...ab,abij->...ij", S, basis) + corner
        return lie.lorentz_embed(np.asarray(S), 5)

    def rho_star(s):
        if isinstance(s, Jet):
            basis = np.zeros((4, 4, 5, 5))
            for a in range(4):
                for b in range(4):
                    basis[a, b, a, b] = 1
            return einsum("...ab,abij->...ij", s, basis)
        return lie.lorentz_embed(np.asarray(s), 5, algebra=True)

    return MorphismCocycle(lie.so13(), lorentz_in_poincare(), rho, rho_star)


# -- connections --------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class CartanConn:
    """ϖ with its split.  ``conn`` carries the cocycle used for gauge transformations."""

    conn: ConnForm
    split: CartanSplit

    @property
    def form(self) -> LocalForm:
        return self.conn.form

    @property
    def cocycle(self) -> LocalCocycle:
        return self.conn.cocycle

    def at(self, x) -> np.ndarray:
        return self.conn.at(x)

    def algebra_residual(self, points) -> float:
        return max(self.split.ambient.algebra_residual(m) for x in points for m in self.at(x))

    def with_conn(self, conn: ConnForm) -> "CartanConn":
        return CartanConn(conn, self.split)


def cartan_connection(form: LocalForm, split: CartanSplit, cocycle: LocalCocycle, mixed: bool = True) -> CartanConn:
    if form.degree != 1 or form.value_shape != (split.size, split.size):
        raise ShapeMismatch("a Cartan connection is a 1-form valued in Lie G′")
    return CartanConn(ConnForm(form, cocycle, mixed), split)


def flat_connection(split: CartanSplit, cocycle: LocalCocycle, n: int = 4) -> CartanConn:
    """ϖ_μ = u_μ: identity soldering, zero subalgebra part."""
    if n != split.dim:
        raise ShapeMismatch("flat model needs chart dimension equal to the quotient dimension")
    return cartan_connection(constant_form(1, n, split.quotient[:n]), split, cocycle)


def quotient_projection(split: CartanSplit, f: LocalForm) -> LocalForm:
    return f.map_values(split.tau, name=f"τ({f.name})")


def soldering(w: CartanConn) -> TensorialField:
    """θ = τ(ϖ) as a matrix-valued 1-form."""
    return TensorialField(quotient_projection(w.split, w.form), AdjointRep(w.split.size), w.cocycle, w.conn.mixed)


def soldering_components(w: CartanConn) -> LocalForm:
    """θ as a quotient-vector-valued 1-form: components θ[μ, a] = e^a_μ."""
    return w.form.map_values(w.split.coefficients, value_shape=(w.split.dim,), name="θ")


def vielbein_of(w: CartanConn) -> FieldHandle:
    """e[a, μ] = e^a_μ from the soldering form."""
    th = soldering_components(w)
    return FieldHandle(lambda X: th.field(X).swapaxes(0, 1).real, th.n, th.depth, name="e")


@dataclass
class InjectivityReport:
    passed: bool
    failing_points: list
    min_abs_det: float
    min_singular_value: float
    points_checked: int


def check_injectivity(w: CartanConn | FieldHandle, points, tol: float = 1e-8) -> InjectivityReport:
    """Rank of x ↦ (e^a_μ(x)) at each point; accepts a Cartan connection or a vielbein field."""
    e = vielbein_of(w) if isinstance(w, CartanConn) else w
    failing, dets, sings = [], [], []
    for x in points:
        m = np.real(lift(e, x, 0).value)
        s = np.linalg.svd(m, compute_uv=False)
        d = abs(float(np.linalg.det(m))) if m.shape[0] == m.shape[1] else float(np.prod(s))
        dets.append(d)
        sings.append(float(s.min()))
        if d <= tol or s.min() <= tol:
            failing.append(np.asarray(x, float).tolist())
    return InjectivityReport(not failing, failing, min(dets, default=np.inf), min(sings, default=np.inf), len(points))


def metric_from_soldering(e: FieldHandle | CartanConn, eta: np.ndarray = ETA, points=None,
                          tol: float = 1e-8) -> MetricField:
    """g_{μν} = e^a_μ η_{ab} e^b_ν; ``points`` are checked for a singular frame."""
    if isinstance(e, CartanConn):
        e = vielbein_of(e)
    if points is not None:
        rep = check_injectivity(e, points, tol)
        if not rep.passed:
            raise DegenerateSoldering("singular frame", rep.failing_points)
    eta = np.asarray(eta, float)

    def fn(X):
        E = e(X)
        return einsum("...am,...an->...mn", E, E.map_linear(lambda p: np.einsum("ab,...bn->...an", eta, p)))

    sig = tuple(int(np.sign(v)) for v in np.diag(eta))
    return MetricField(FieldHandle(fn, e.n_vars, e.depth, name="g"), e.n_vars, sig)


# -- torsion and grading ------------------------------------------------------
def torsion(w: CartanConn) -> TensorialField:
    """Θ = τ(Ω) with Ω = dϖ + ϖ∧ϖ."""
    Om = curvature(w.conn)
    return TensorialField(quotient_projection(w.split, Om.form), Om.rep, Om.cocycle, Om.mixed)


def reductive_torsion(w: CartanConn) -> LocalForm:
    """dθ + [ω, θ] with ω the subalgebra part; meaningful for reductive splits."""
    if w.split.kind != "reductive":
        raise GradingError(f"{w.split.name} split is not reductive")
    theta = quotient_projection(w.split, w.form)
    omega = w.form - theta
    return exterior_derivative(theta) + wedge_bracket(omega, theta)


def _as_form(X) -> LocalForm:
    if isinstance(X, LocalForm):
        return X
    if isinstance(X, (CartanConn, ConnForm, TensorialField)):
        return X.form
    raise TypeError(f"cannot split {type(X).__name__}")


def grading_split(X, split: CartanSplit) -> dict:
    """Level components {level: form}; entrywise masks, so they add back exactly."""
    f = _as_form(X)
    out = {}
    for lvl in split.levels:
        mask = split.level_mask(lvl)
        out[lvl] = f.map_values(lambda j, m=mask: j.map_linear(lambda p: p * m), name=f"{f.name}[{lvl}]")
    return out


def level_residual(M: np.ndarray, split: CartanSplit, level: int) -> float:
    """Distance of ``M`` from the span of the level-``level`` basis of Lie G′."""
    B = split.ambient.level_basis(level).astype(complex)
    b = lie._realify(B)
    M = np.asarray(M, dtype=complex)
    v = np.concatenate([M.ravel().real, M.ravel().imag])
    c, *_ = np.linalg.lstsq(b, v, rcond=None)
    return float(np.max(np.abs(b @ c - v), initial=0.0))
