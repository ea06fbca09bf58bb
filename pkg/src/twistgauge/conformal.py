"""Tractor and twistor calculus for a 4-dimensional Lorentzian frame.

Conventions (signature (+,−,−,−), η = diag(1,−1,−1,−1)):

* vielbein ``e[a, μ] = e^a_μ`` with g_{μν} = e^a_μ η_{ab} e^b_ν;
* Christoffels Γ^ρ_{μν} = ½ g^{ρσ}(∂_μ g_{σν} + ∂_ν g_{σμ} − ∂_σ g_{μν});
* Riemann R^ρ_{σμν} = ∂_μ Γ^ρ_{νσ} − ∂_ν Γ^ρ_{μσ} + Γ^ρ_{μλ}Γ^λ_{νσ} − Γ^ρ_{νλ}Γ^λ_{μσ},
  Ricci Ric_{σν} = R^ρ_{σρν}, scalar R = g^{σν} Ric_{σν};
* Schouten P = ½(Ric − (R/6) g) (what :func:`schouten` returns);
* spin connection A^a_{bμ} = e^a_ν(∂_μ E^ν_b + Γ^ν_{μλ} E^λ_b), E = e⁻¹,
  the torsion-free solution of de + A∧e = 0.

The tractor connection is the block matrix

    ϖ = [[0, P, 0], [e, A, Pᵗ], [0, eᵗ, 0]],   Pᵗ = ηP, eᵗ = ηe,

whose P-block is the frame 1-form P_b = −P_{bμ}dx^μ built from the Schouten
tensor above.  The sign is the one for which the Weyl block is trace free
and f = 0 (see :data:`TRACTOR_P_SIGN`).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from . import lie
from .cartan import CartanConn, tractor_split, twistor_split
from .cocycle import TractorCocycle, TwistorCocycle
from .errors import DegenerateSoldering, RepresentationMismatch, RepresentationNotUnitary
from .forms import (
    MATMUL,
    MATVEC,
    LocalForm,
    MetricField,
    exterior_derivative,
    form,
    hodge_star,
    wedge,
)
from .gauge import ConnForm, TensorialField, curvature, transform_connection, transform_mixed, transform_tensorial
from .jets import Coords, FieldHandle, Jet, einsum, grad, jinv
from .lie import ETA, SIGMA

__all__ = [
    "TRACTOR_P_SIGN",
    "TractorData",
    "TwistorData",
    "TractorCurvatureBlocks",
    "TwistorCurvatureBlocks",
    "ConformalLagrangians",
    "vielbein_from_metric",
    "metric_from_vielbein",
    "christoffel",
    "riemann",
    "ricci",
    "schouten",
    "SchoutenData",
    "weyl_oracle",
    "spin_connection",
    "frame_form",
    "schouten_form",
    "tractor_connection",
    "twistor_connection",
    "tractor_to_twistor_form",
    "curvature_blocks",
    "twistor_curvature_blocks",
    "weyl_trace",
    "frame_components",
    "weyl_covariance",
    "lorentz_covariance",
    "lagrangian_conformal",
    "lagrangian_matter",
    "check_unitary",
]

TRACTOR_P_SIGN = -1.0
"""Sign relating the tractor P-block to the Schouten tensor returned by :func:`schouten`."""


# -- metric geometry on jets ------------------------------------------------------
def metric_from_vielbein(e: FieldHandle) -> MetricField:
    def fn(X):
        E = e(X)
        return einsum("...am,...an->...mn", E, E.map_linear(lambda p: np.einsum("ab,...bn->...an", ETA, p)))

    return MetricField(FieldHandle(fn, e.n_vars, e.depth, name="g"), e.n_vars, (1, -1, -1, -1))


def vielbein_from_metric(g: MetricField, iterations: int = 40) -> FieldHandle:
    """e = (η g)^{1/2} by Denman–Beavers iteration on jets, so eᵀηe = g.

    η-self-adjointness of ηg carries over to its principal square root,
    which is what makes ηe symmetric.
    """

    def fn(X):
        gj = g(X)
        M = gj.map_linear(lambda p: np.einsum("ab,...bn->...an", ETA, p))
        if np.any(np.linalg.eigvals(M.value).real <= 0):
            raise DegenerateSoldering("η·g has eigenvalues off the principal square-root domain",
                                      [X.point.tolist()])
        Y, Z = M, X.const(np.eye(M.shape[-1]))
        for _ in range(iterations):
            Yn = (Y + jinv(Z)) * 0.5
            Z = (Z + jinv(Y)) * 0.5
            delta = max(float(np.max(np.abs(a - b))) for a, b in zip(Yn.parts, Y.parts))
            Y = Yn
            if delta < 1e-15:
                break
        return Y

    return FieldHandle(fn, g.n, g.depth, name="e")


def christoffel(gj: Jet) -> Jet:
    """Γ[ρ, μ, ν] from a metric jet (one order lost)."""
    dg = grad(gj)  # [λ, a, b] = ∂_λ g_ab
    k = (dg.map_linear(lambda p: np.einsum("...msn->...smn", p))
         + dg.map_linear(lambda p: np.einsum("...nsm->...smn", p))
         - dg)
    return einsum("...rs,...smn->...rmn", jinv(gj), k) * 0.5


def _riemann_from_gamma(G: Jet) -> Jet:
    dG = grad(G)  # [μ, ρ, ν, σ] = ∂_μ Γ^ρ_{νσ}
    t1 = dG.map_linear(lambda p: np.einsum("...mrns->...rsmn", p))
    gg = einsum("...rml,...lns->...rsmn", G, G)
    R = t1 + gg
    return R - R.map_linear(lambda p: np.swapaxes(p, -1, -2))


def riemann(g: MetricField) -> FieldHandle:
    """R[ρ, σ, μ, ν] = R^ρ_{σμν}."""
    return FieldHandle(lambda X: _riemann_from_gamma(christoffel(g(X))), g.n, g.depth + 2, name="Riem")


def ricci(g: MetricField) -> tuple[FieldHandle, FieldHandle]:
    Rm = riemann(g)
    ric = FieldHandle(lambda X: Rm(X).map_linear(lambda p: np.einsum("...rsrn->...sn", p)), g.n, Rm.depth, name="Ric")
    scal = FieldHandle(lambda X: einsum("...sn,...sn->...", jinv(g(X)), ric(X)), g.n, Rm.depth, name="R")
    return ric, scal


@dataclass(frozen=True, eq=False)
class SchoutenData:
    """Coordinate Schouten tensor P_{μν}, Ricci tensor and scalar curvature."""

    tensor: FieldHandle
    ricci: FieldHandle
    scalar: FieldHandle
    metric: MetricField


def schouten(g: MetricField) -> SchoutenData:
    """P_{μν} = ½(Ric_{μν} − (R/6) g_{μν})."""
    if g.n != 4:
        raise RepresentationMismatch("the Schouten normalization here is for 4 dimensions")
    ric, scal = ricci(g)

    def fn(X):
        return (ric(X) - g(X) * (scal(X) * (1.0 / 6.0))) * 0.5

    return SchoutenData(FieldHandle(fn, g.n, ric.depth, name="P"), ric, scal, g)


def weyl_oracle(g: MetricField) -> FieldHandle:
    """Coordinate Weyl tensor C^ρ_{σμν} = R^ρ_{σμν} − (δ∧P) terms (Kulkarni–Nomizu).

    C_{ρσμν} = R_{ρσμν} − (g_{ρμ}P_{σν} − g_{ρν}P_{σμ} − g_{σμ}P_{ρν} + g_{σν}P_{ρμ}).
    """
    Rm = riemann(g)
    S = schouten(g)

    def fn(X):
        gj, P = g(X), S.tensor(X)
        low = einsum("...ak,...ksmn->...asmn", gj, Rm(X))
        kn = einsum("...rm,...sn->...rsmn", gj, P)
        kn = (kn - kn.map_linear(lambda p: np.swapaxes(p, -1, -2)))
        kn = kn - kn.map_linear(lambda p: np.einsum("...rsmn->...srmn", p))
        return einsum("...ka,...asmn->...ksmn", jinv(gj), low - kn)

    return FieldHandle(fn, g.n, Rm.depth, name="Weyl")


# -- frame forms -----------------------------------------------------------------
def frame_form(e: FieldHandle) -> LocalForm:
    """e^a = e^a_μ dx^μ as an ℝ⁴-valued 1-form."""
    return form(1, e.n_vars, (4,), lambda X: e(X).swapaxes(-1, -2), e.depth, name="e")


def spin_connection(e: FieldHandle, check_points=None) -> LocalForm:
    """Torsion-free so(1,3) connection A^a_b of the frame ``e``."""
    if check_points is not None:
        for x in check_points:
            if abs(np.linalg.det(np.real(e.at(x)))) <= 1e-8:
                raise DegenerateSoldering("singular frame", [np.asarray(x).tolist()])
    g = metric_from_vielbein(e)

    def fn(X):
        ej = e(X)
        E = jinv(ej)
        G = christoffel(g(X))
        dE = grad(E)  # [μ, ν, b]
        term = dE + einsum("...nml,...lb->...mnb", G, E)
        return einsum("...an,...mnb->...mab", ej, term)

    return form(1, e.n_vars, (4, 4), fn, e.depth + 1, algebra=lie.so13(), name="A")


def schouten_form(e: FieldHandle, S: SchoutenData | None = None) -> LocalForm:
    """P-block 1-form P_b = TRACTOR_P_SIGN · E^ν_b P_{νμ} dx^μ."""
    if S is None:
        S = schouten(metric_from_vielbein(e))

    def fn(X):
        return einsum("...nb,...nm->...mb", jinv(e(X)), S.tensor(X)) * TRACTOR_P_SIGN

    return form(1, e.n_vars, (4,), fn, max(e.depth, S.tensor.depth), name="P")


def frame_components(f: LocalForm, e: FieldHandle) -> LocalForm:
    """Convert the form indices of a 2-form to frame indices: f_{cd} = E^μ_c E^ν_d f_{μν}."""
    if f.degree != 2:
        raise RepresentationMismatch("frame_components expects a 2-form")

    def fn(X):
        E = jinv(e(X))
        c = f.field(X)
        extra = "xyz"[: len(f.value_shape)]
        t = einsum(f"...mc,...mn{extra}->...cn{extra}", E, c)
        return einsum(f"...nd,...cn{extra}->...cd{extra}", E, t)

    return LocalForm(2, f.n, f.value_shape, FieldHandle(fn, f.n, max(f.depth, e.depth)), None, False, f.name)


# -- tractor data ------------------------------------------------------------------
def _placement():
    Ue = np.zeros((4, 6, 6))
    Up = np.zeros((4, 6, 6))
    Ua = np.zeros((4, 4, 6, 6))
    for a in range(4):
        Ue[a, 1 + a, 0] = 1
        Ue[a, 5, 1 + a] = ETA[a, a]
        Up[a, 0, 1 + a] = 1
        Up[a, 1 + a, 5] = ETA[a, a]
        for b in range(4):
            Ua[a, b, 1 + a, 1 + b] = 1
    return Ue, Ua, Up


@dataclass(frozen=True, eq=False)
class TractorData:
    """Blocks e, A, P and the assembled 6×6 tractor connection."""

    vielbein: FieldHandle
    e: LocalForm
    A: LocalForm
    P: LocalForm
    connection: ConnForm

    @property
    def varpi(self) -> LocalForm:
        return self.connection.form

    @property
    def metric(self) -> MetricField:
        return metric_from_vielbein(self.vielbein)

    def cartan(self) -> CartanConn:
        return CartanConn(self.connection, tractor_split())


def _assemble_tractor(e1: LocalForm, A1: LocalForm, P1: LocalForm) -> LocalForm:
    Ue, Ua, Up = _placement()

    def fn(X):
        return (einsum("...ma,aij->...mij", e1.field(X), Ue)
                + einsum("...mab,abij->...mij", A1.field(X), Ua)
                + einsum("...mb,bij->...mij", P1.field(X), Up))

    return form(1, e1.n, (6, 6), fn, max(e1.depth, A1.depth, P1.depth), algebra=lie.tractor_full(), name="ϖ")


def tractor_connection(e: FieldHandle, A: LocalForm | None = None, P: LocalForm | None = None,
                       mixed: bool = True) -> TractorData:
    """Assemble ϖ; missing A or P are filled in by the standard (torsion-free, Schouten) choice."""
    e1 = frame_form(e)
    A1 = spin_connection(e) if A is None else A
    P1 = schouten_form(e) if P is None else P
    varpi = _assemble_tractor(e1, A1, P1)
    return TractorData(e, e1, A1, P1, ConnForm(varpi, TractorCocycle(e, mixed=mixed), mixed))


@dataclass(frozen=True, eq=False)
class TractorCurvatureBlocks:
    """f (scalar), T (ℝ⁴), W (so(1,3)), C (ℝ⁴*) 2-forms computed blockwise."""

    f: LocalForm
    T: LocalForm
    W: LocalForm
    C: LocalForm

    def reassemble(self) -> LocalForm:
        Ue, Ua, Up = _placement()
        f, T, W, C = self.f, self.T, self.W, self.C
        diag = np.zeros((6, 6))
        diag[0, 0], diag[5, 5] = 1, -1

        def fn(X):
            return (einsum("...mn,ij->...mnij", f.field(X), diag)
                    + einsum("...mna,aij->...mnij", T.field(X), Ue)
                    + einsum("...mnab,abij->...mnij", W.field(X), Ua)
                    + einsum("...mnb,bij->...mnij", C.field(X), Up))

        return form(2, f.n, (6, 6), fn, max(f.depth, T.depth, W.depth, C.depth), name="Ω")


def _dot(x, y):
    return np.einsum("...a,...a->...", x, y)


def _outer_vec(x, y):
    return x[..., :, None] * y[..., None, :]


def _vecmat(x, y):
    return np.einsum("...b,...bc->...c", x, y)


def _lower(f: LocalForm) -> LocalForm:
    return f.map_values(lambda j: j.map_linear(lambda p: p * np.diag(ETA)))


def curvature_blocks(T: TractorData) -> TractorCurvatureBlocks:
    """f = P∧e, T = de + A∧e, W = dA + A∧A + e∧P + Pᵗ∧eᵗ, C = dP + P∧A."""
    e1, A1, P1 = T.e, T.A, T.P
    f = wedge(P1, e1, _dot)
    tor = exterior_derivative(e1) + wedge(A1, e1, MATVEC)
    W = exterior_derivative(A1) + wedge(A1, A1, MATMUL) + wedge(e1, P1, _outer_vec) + wedge(_lower(P1), _lower(e1),
                                                                                          _outer_vec)
    C = exterior_derivative(P1) + wedge(P1, A1, _vecmat)
    return TractorCurvatureBlocks(f, tor, W, C)


def weyl_trace(W: LocalForm, e: FieldHandle) -> LocalForm:
    """Ricc(W)_{bd} = W^a_{bad} as a matrix-valued 0-form."""
    Wf = frame_components(W, e)
    return form(0, W.n, (4, 4), lambda X: Wf.field(X).map_linear(lambda p: np.einsum("...adab->...bd", p)), Wf.depth,
                name="Ricc(W)")


# -- twistors ----------------------------------------------------------------------
@lru_cache(maxsize=None)
def _phi_tensor() -> np.ndarray:
    """Real-linear tensor of the tractor→twistor algebra map on 6×6 matrices."""
    out = np.zeros((6, 6, 4, 4), dtype=complex)
    for i in range(6):
        for j in range(6):
            m = np.zeros((6, 6))
            m[i, j] = 1
            out[i, j] = lie.tractor_to_twistor_alg(m)
    return out


def tractor_to_twistor_form(f: LocalForm) -> LocalForm:
    """Apply the tractor→twistor algebra map to the values of a 6×6-valued form."""
    phi = _phi_tensor()
    return f.map_values(lambda j: einsum("...ij,ijkl->...kl", j, phi), value_shape=(4, 4), name=f"bar({f.name})")


@dataclass(frozen=True, eq=False)
class TwistorData:
    """Blocks ē = x̄(e), Ā = spin lift of A, P̄ = covector_bar(P), and the 4×4 connection."""

    vielbein: FieldHandle
    e_bar: LocalForm
    A_bar: LocalForm
    P_bar: LocalForm
    connection: ConnForm

    @property
    def varpi(self) -> LocalForm:
        return self.connection.form

    def cartan(self) -> CartanConn:
        return CartanConn(self.connection, twistor_split())


def twistor_connection(e: FieldHandle, A: LocalForm | None = None, P: LocalForm | None = None,
                       mixed: bool = True, tractor: TractorData | None = None) -> TwistorData:
    """ϖ̄ = [[−Ā*, −iP̄], [iē, Ā]] assembled directly from the spin images of the blocks."""
    if tractor is not None:
        e1, A1, P1 = tractor.e, tractor.A, tractor.P
    else:
        e1 = frame_form(e)
        A1 = spin_connection(e) if A is None else A
        P1 = schouten_form(e) if P is None else P
    K = lie._so_to_spin_tensor()
    eb = e1.map_values(lambda j: einsum("...a,aij->...ij", j, SIGMA.astype(complex)), value_shape=(2, 2), name="ē")
    Pb = P1.map_values(lambda j: einsum("...a,aij->...ij", j, 2.0 * SIGMA.astype(complex)), value_shape=(2, 2),
                       name="P̄")
    Ab = A1.map_values(lambda j: einsum("...ab,ijab->...ij", j, K), value_shape=(2, 2), name="Ā")
    TL, TR, BL, BR = (np.zeros((2, 2, 4, 4)) for _ in range(4))
    for i in range(2):
        for j in range(2):
            TL[i, j, i, j] = 1
            TR[i, j, i, 2 + j] = 1
            BL[i, j, 2 + i, j] = 1
            BR[i, j, 2 + i, 2 + j] = 1

    def fn(X):
        a = Ab.field(X)
        a_star = a.conj().swapaxes(-1, -2)
        return (einsum("...ij,ijkl->...kl", -a_star, TL)
                + einsum("...ij,ijkl->...kl", Pb.field(X) * (-1j), TR)
                + einsum("...ij,ijkl->...kl", eb.field(X) * 1j, BL)
                + einsum("...ij,ijkl->...kl", a, BR))

    varpi = form(1, e1.n, (4, 4), fn, max(e1.depth, A1.depth, P1.depth), algebra=lie.twistor_full(), name="ϖ̄")
    return TwistorData(e, eb, Ab, Pb, ConnForm(varpi, TwistorCocycle(e, mixed=mixed), mixed))


@dataclass(frozen=True, eq=False)
class TwistorCurvatureBlocks:
    """2×2 blocks of Ω̄: upper-left, upper-right, lower-left, lower-right."""

    upper_left: LocalForm
    upper_right: LocalForm
    lower_left: LocalForm
    lower_right: LocalForm
    full: LocalForm


def twistor_curvature_blocks(Tb: TwistorData) -> TwistorCurvatureBlocks:
    Om = curvature(Tb.connection).form
    s0, s1 = slice(0, 2), slice(2, 4)
    return TwistorCurvatureBlocks(Om.block(s0, s0), Om.block(s0, s1), Om.block(s1, s0), Om.block(s1, s1), Om)


# -- covariance --------------------------------------------------------------------
def weyl_covariance(T: TractorData | TwistorData, z: FieldHandle) -> dict:
    """ϖ^z and Ω^z for a positive Weyl field z (1×1 matrix field)."""
    Az = transform_connection(T.connection, z)
    Om = curvature(T.connection)
    return {
        "varpi": Az,
        "curvature": curvature(Az),
        "conjugated_curvature": transform_tensorial(Om, z),
    }


def lorentz_covariance(T: TractorData | TwistorData, S: FieldHandle, z: FieldHandle | None = None) -> dict:
    """Both orders of a Weyl and a Lorentz/spin transformation, and the one-shot version."""
    out = {"S": transform_mixed(T.connection, None, S)}
    if z is not None:
        out["z_then_S"] = transform_mixed(transform_mixed(T.connection, z, None), None, S)
        out["S_then_z"] = transform_mixed(transform_mixed(T.connection, None, S), z, None)
        out["one_shot"] = transform_mixed(T.connection, z, S)
    return out


# -- Lagrangians -------------------------------------------------------------------
def _trace_op(x, y):
    return np.einsum("...ij,...ji->...", x, y)


def _spin_op(x, y):
    tr = np.einsum("...ij,...ji->...", x, y)
    return 2.0 * (tr + np.conj(tr))


def _density(top: LocalForm) -> FieldHandle:
    """Coefficient of dx⁰∧…∧dx³ of a top form."""
    idx = tuple(range(top.n))
    return FieldHandle(lambda X: top.field(X)[idx], top.n, top.depth, name=top.name)


@dataclass(frozen=True, eq=False)
class ConformalLagrangians:
    """Scalar densities ½B(Ω,∗Ω), ¼B̄(Ω̄,∗Ω̄) and ½Tr(W∧∗W)."""

    tractor: FieldHandle
    twistor: FieldHandle
    weyl: FieldHandle

    def at(self, x) -> tuple[float, float, float]:
        return tuple(float(np.real(f.at(x))) for f in (self.tractor, self.twistor, self.weyl))


def lagrangian_conformal(T: TractorData, Tb: TwistorData, g: MetricField | None = None) -> ConformalLagrangians:
    g = T.metric if g is None else g
    Om = curvature(T.connection).form
    Omb = curvature(Tb.connection).form
    W = curvature_blocks(T).W
    l_tr = wedge(Om, hodge_star(Om, g), _trace_op) * 0.5
    l_tw = wedge(Omb, hodge_star(Omb, g), _spin_op) * 0.25
    l_w = wedge(W, hodge_star(W, g), _trace_op) * 0.5
    return ConformalLagrangians(_density(l_tr), _density(l_tw), _density(l_w))


def check_unitary(rep_star: Callable[[np.ndarray], np.ndarray], basis, h: np.ndarray, hermitian: bool = False,
                  tol: float = 1e-10) -> float:
    """max over the basis of |ρ*(X)ᵀh + hρ*(X)| (ρ*(X)* for hermitian forms)."""
    worst = 0.0
    for X in basis:
        r = rep_star(X)
        rt = r.conj().T if hermitian else r.T
        worst = max(worst, float(np.max(np.abs(rt @ h + h @ r))))
    if worst > tol:
        raise RepresentationNotUnitary(f"representation does not preserve the bilinear form (residual {worst:.2e})")
    return worst


def lagrangian_matter(A: ConnForm, phi: TensorialField, U: Callable[[Jet], Jet], g: MetricField,
                      h: np.ndarray, hermitian: bool = False) -> FieldHandle:
    """½Tr(F∧∗F) + ⟨Dφ,∗Dφ⟩ + U(⟨φ,φ⟩)∗1 as a scalar density."""
    from .gauge import covariant_derivative

    rep = phi.rep
    X0 = Coords(np.zeros(g.n), 0)
    check_unitary(lambda M: rep.algebra(X0.const(M)).value, A.cocycle.target.basis, h, hermitian)
    h = np.asarray(h)

    def pair(x, y):
        xx = np.conj(x) if hermitian else x
        return np.einsum("...i,ij,...j->...", xx, h, y)

    F = curvature(A).form
    Dphi = covariant_derivative(A, phi).form
    ym = wedge(F, hodge_star(F, g), _trace_op) * 0.5
    kin = wedge(Dphi, hodge_star(Dphi, g), pair)
    ym_d, kin_d = _density(ym), _density(kin)
    vol = _density(hodge_star(form(0, g.n, (), lambda X: X.const(np.ones(())), 0), g))
    ph = phi.form

    def fn(X):
        p = ph.field(X)
        s = einsum("...i,...i->...", p.conj() if hermitian else p, p.map_linear(lambda q: np.einsum("ij,...j->...i", h, q)))
        return ym_d(X) + kin_d(X) + U(s) * vol(X)

    return FieldHandle(fn, g.n, max(ym_d.depth, kin_d.depth, vol.depth), name="L")
