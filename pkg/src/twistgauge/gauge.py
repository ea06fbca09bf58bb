"""Twisted and mixed local gauge fields.

A :class:`ConnForm` is a matrix-valued 1-form together with the cocycle of
the section it was pulled back with.  Every transformation returns a new
object carrying the cocycle of the transformed section, so repeated
transformations compose correctly: ``(A^γ)^η`` uses ``C_{σγ}(η)``.

Active transformations and passive gluing share one implementation
(:func:`_act`), which is why they agree bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .cocycle import GaugeJet, LocalCocycle, MorphismCocycle, exp_field, field_inverse, field_product
from .errors import BadPartition, DomainError, EmptyOverlap, GroupMismatch, RepresentationMismatch
from .forms import (
    MATMUL,
    MATVEC,
    Chart,
    LocalForm,
    exterior_derivative,
    form,
    wedge,
    wedge_bracket,
    zero_form,
)
from .jets import FieldHandle, Jet, jinv, lift, reciprocal

__all__ = [
    "VectorRep",
    "AdjointRep",
    "ConnForm",
    "TensorialField",
    "OverlapData",
    "PartitionOfUnity",
    "connection",
    "tensorial",
    "pure_gauge",
    "curvature",
    "covariant_derivative",
    "rho_star_wedge",
    "transform_connection",
    "transform_tensorial",
    "transform_mixed",
    "glue",
    "infinitesimal",
    "finite_variation",
    "dressing_connection",
    "glued_dressing_connection",
    "max_abs_on",
]


# -- representations ----------------------------------------------------------
@dataclass(frozen=True, eq=False)
class VectorRep:
    """ρ acting on column vectors.  Both maps take and return jets.

    The default is the defining representation of the target group.
    """

    dim: int
    rho: Callable = None
    rho_star: Callable = None
    name: str = "vector"

    def group(self, M: Jet) -> Jet:
        return M if self.rho is None else self.rho(M)

    def algebra(self, X: Jet) -> Jet:
        return X if self.rho_star is None else self.rho_star(X)

    def transform(self, M: LocalForm, a: LocalForm) -> LocalForm:
        """ρ(M)⁻¹ a for a 0-form M."""
        inv = M.map_values(lambda j: jinv(self.group(j)), value_shape=(self.dim, self.dim))
        return wedge(inv, a, MATVEC)

    def act(self, A: LocalForm, a: LocalForm) -> LocalForm:
        """ρ*(A)∧a."""
        rA = A.map_values(self.algebra, value_shape=(self.dim, self.dim))
        return wedge(rA, a, MATVEC)

    def identity_residual(self, size: int) -> float:
        from .jets import Coords

        X = Coords(np.zeros(1), 0)
        eye = X.const(np.eye(size))
        return float(np.max(np.abs(self.group(eye).value - np.eye(self.dim))))

    def bracket_residual(self, basis: np.ndarray) -> float:
        """max |ρ*([X,Y]) − [ρ*X, ρ*Y]| over basis pairs."""
        from .jets import Coords

        X = Coords(np.zeros(1), 0)
        worst = 0.0
        for p in basis:
            for q in basis:
                rp, rq = self.algebra(X.const(p)).value, self.algebra(X.const(q)).value
                lhs = self.algebra(X.const(p @ q - q @ p)).value
                worst = max(worst, float(np.max(np.abs(lhs - (rp @ rq - rq @ rp)))))
        return worst


@dataclass(frozen=True, eq=False)
class AdjointRep:
    """Conjugation on matrix-valued forms: ρ(g)a = g a g⁻¹, ρ*(X)a = [X, a]."""

    dim: int
    name: str = "adjoint"

    def transform(self, M: LocalForm, a: LocalForm) -> LocalForm:
        inv = M.map_values(jinv)
        return wedge(wedge(inv, a), M)

    def act(self, A: LocalForm, a: LocalForm) -> LocalForm:
        return wedge_bracket(A, a)

    def identity_residual(self, size: int) -> float:
        return 0.0

    def bracket_residual(self, basis) -> float:
        return 0.0


# -- field containers ---------------------------------------------------------
@dataclass(frozen=True, eq=False)
class ConnForm:
    """Gauge potential A with the cocycle of its section.

    ``mixed`` marks a potential valued in Lie(G⋊K); transformations by K
    then require the cocycle to carry a K embedding.
    """

    form: LocalForm
    cocycle: LocalCocycle
    mixed: bool = False

    def __post_init__(self):
        if self.form.degree != 1:
            raise RepresentationMismatch("a connection is a 1-form")

    @property
    def n(self) -> int:
        return self.form.n

    def at(self, x) -> np.ndarray:
        return self.form.at(x)

    def algebra_residual(self, points) -> float:
        """Largest distance of A_μ(x) from the target algebra over ``points``."""
        alg = self.cocycle.target
        worst = 0.0
        for x in points:
            for comp in self.at(x):
                worst = max(worst, alg.algebra_residual(comp))
        return worst


@dataclass(frozen=True, eq=False)
class TensorialField:
    """A C-tensorial form a valued in a representation space."""

    form: LocalForm
    rep: object
    cocycle: LocalCocycle
    mixed: bool = False

    @property
    def degree(self) -> int:
        return self.form.degree

    def at(self, x) -> np.ndarray:
        return self.form.at(x)


def connection(fn, n: int, size: int, cocycle: LocalCocycle, depth: int = 0, mixed: bool = False,
               dtype=float) -> ConnForm:
    """Wrap ``fn(X) -> Jet`` of shape (n, size, size) as a :class:`ConnForm`."""
    return ConnForm(form(1, n, (size, size), fn, depth, algebra=cocycle.target, name="A"), cocycle, mixed)


def tensorial(a: LocalForm, rep, cocycle: LocalCocycle, mixed: bool = False) -> TensorialField:
    return TensorialField(a, rep, cocycle, mixed)


def _zero_form_of(field: FieldHandle, shape) -> LocalForm:
    return LocalForm(0, field.n_vars, tuple(shape), field, None, False, field.name)


def _size(c: LocalCocycle) -> int:
    return c.target.dim


def pure_gauge(cocycle: LocalCocycle, gamma: FieldHandle) -> ConnForm:
    """C(γ)⁻¹dC(γ), the transform of the zero potential."""
    n = _size(cocycle)
    zero = ConnForm(zero_form(1, gamma.n_vars, (n, n)), cocycle)
    return transform_connection(zero, gamma)


# -- curvature and covariant derivative ---------------------------------------
def curvature(A: ConnForm) -> TensorialField:
    """F = dA + ½[A, A] = dA + A∧A."""
    a = A.form
    F = exterior_derivative(a) + wedge(a, a)
    return TensorialField(F, AdjointRep(a.value_shape[0]), A.cocycle, A.mixed)


def _check_rep(A: ConnForm, a: TensorialField):
    if a.cocycle is not A.cocycle and type(a.cocycle) is not type(A.cocycle):
        raise RepresentationMismatch("connection and tensorial field belong to different cocycles")
    size = A.form.value_shape[0]
    if isinstance(a.rep, AdjointRep) and a.form.value_shape != (size, size):
        raise RepresentationMismatch("adjoint field shape does not match the connection")
    if isinstance(a.rep, VectorRep) and a.form.value_shape != (a.rep.dim,):
        raise RepresentationMismatch("vector field shape does not match its representation")
    if isinstance(a.rep, VectorRep) and a.rep.rho_star is None and a.rep.dim != size:
        raise RepresentationMismatch("defining representation must match the connection size")


def covariant_derivative(A: ConnForm, a: TensorialField) -> TensorialField:
    """Da = da + ρ*(A)∧a."""
    _check_rep(A, a)
    D = exterior_derivative(a.form) + a.rep.act(A.form, a.form)
    return TensorialField(D, a.rep, a.cocycle, a.mixed)


def rho_star_wedge(F: TensorialField, a: TensorialField) -> LocalForm:
    """ρ*(F)∧a, the right-hand side of D²a = ρ*(F)a."""
    return a.rep.act(F.form, a.form)


# -- finite transformations ---------------------------------------------------
def _as_field(g) -> FieldHandle | None:
    if g is None or isinstance(g, FieldHandle):
        return g
    if isinstance(g, GaugeJet):
        return g.as_field()
    raise TypeError("gauge data must be a FieldHandle or GaugeJet")


def _gauge_matrix(c: LocalCocycle, gamma, zeta) -> FieldHandle:
    """M = C(γ)·ζ with ζ embedded into the target group."""
    parts = []
    if gamma is not None:
        parts.append(c.of(gamma))
    if zeta is not None:
        c._require_k()
        parts.append(FieldHandle(lambda X: c.embed_k(zeta(X)), zeta.n_vars, zeta.depth, name="ζ"))
    return parts[0] if len(parts) == 1 else field_product(*parts)


def _moved(c: LocalCocycle, gamma, zeta) -> LocalCocycle:
    if gamma is not None:
        c = c.moved(gamma)
    if zeta is not None:
        c = c.k_moved(zeta)
    return c


def _act(X, gamma, zeta):
    gamma, zeta = _as_field(gamma), _as_field(zeta)
    if gamma is None and zeta is None:
        return X
    c = X.cocycle
    if zeta is not None and not X.mixed:
        raise GroupMismatch("K transformations need a mixed field")
    size = _size(c)
    M = _zero_form_of(_gauge_matrix(c, gamma, zeta), (size, size))
    new_c = _moved(c, gamma, zeta)
    if isinstance(X, ConnForm):
        inv = M.map_values(jinv)
        out = wedge(wedge(inv, X.form), M) + wedge(inv, exterior_derivative(M))
        return ConnForm(LocalForm(1, out.n, out.value_shape, out.field, c.target, False, "A'"), new_c, X.mixed)
    if isinstance(X, TensorialField):
        return TensorialField(X.rep.transform(M, X.form), X.rep, new_c, X.mixed)
    raise TypeError(f"cannot gauge-transform {type(X).__name__}")


def transform_connection(A: ConnForm, gamma) -> ConnForm:
    """A^γ = C(γ)⁻¹AC(γ) + C(γ)⁻¹dC(γ)."""
    if not isinstance(A, ConnForm):
        raise TypeError("expected a ConnForm")
    return _act(A, gamma, None)


def transform_tensorial(a: TensorialField, gamma) -> TensorialField:
    """a^γ = ρ[C(γ)]⁻¹a."""
    if not isinstance(a, TensorialField):
        raise TypeError("expected a TensorialField")
    return _act(a, gamma, None)


def transform_mixed(X, gamma=None, zeta=None):
    """One-shot mixed transformation with M = C(γ)ζ; either factor may be omitted."""
    return _act(X, gamma, zeta)


@dataclass(frozen=True, eq=False)
class OverlapData:
    """Transition data on 𝒰∩𝒰′: σ′ = σ g ℓ."""

    g: FieldHandle
    ell: FieldHandle | None = None
    chart: Chart | None = None
    chart_prime: Chart | None = None

    def __post_init__(self):
        if self.chart is not None and self.chart_prime is not None:
            lo = np.maximum(self.chart.lower, self.chart_prime.lower)
            hi = np.minimum(self.chart.upper, self.chart_prime.upper)
            if np.any(lo >= hi):
                raise EmptyOverlap("charts do not overlap")

    def overlap_box(self) -> Chart | None:
        if self.chart is None or self.chart_prime is None:
            return None
        lo = np.maximum(self.chart.lower, self.chart_prime.lower)
        hi = np.minimum(self.chart.upper, self.chart_prime.upper)
        return Chart(self.chart.dim, tuple(lo), tuple(hi))

    def check(self, points, group, tol: float = 1e-9) -> None:
        from .errors import NotInGroup

        for x in points:
            if not group.contains(lift(self.g, x, 0).value, tol):
                raise NotInGroup(f"transition value at {list(x)} is not in {group.name}")


def glue(X, overlap: OverlapData):
    """Local representative on 𝒰′ (passive transformation, same code path as the active one)."""
    return _act(X, overlap.g, overlap.ell)


# -- infinitesimal transformations --------------------------------------------
def infinitesimal(X, chi: FieldHandle | None = None, upsilon: FieldHandle | None = None) -> LocalForm:
    """δX for the generator c = dC|e(χ) + υ.

    Connections: δA = dc + [A, c].  Tensorial fields: δa = −ρ*(c)a.
    """
    cyc = X.cocycle
    size = _size(cyc)
    n = X.form.n
    parts = []
    if chi is not None:
        parts.append(cyc.diff_of(chi))
    if upsilon is not None:
        if not X.mixed or cyc.k_embed_alg is None:
            raise GroupMismatch("K generators need a mixed field")
        parts.append(FieldHandle(lambda Y: cyc.k_embed_alg(upsilon(Y)), n, upsilon.depth, name="υ"))
    if not parts:
        return zero_form(X.form.degree, n, X.form.value_shape)
    if len(parts) == 1:
        gen = parts[0]
    else:
        p, q = parts
        gen = FieldHandle(lambda Y: p(Y) + q(Y), n, max(p.depth, q.depth), name="c")
    c = _zero_form_of(gen, (size, size))
    if isinstance(X, ConnForm):
        return exterior_derivative(c) + wedge_bracket(X.form, c)
    return -X.rep.act(c, X.form)


def finite_variation(X, chi: FieldHandle | None, upsilon: FieldHandle | None = None, tau: float = 1e-6) -> LocalForm:
    """(X^{γ_τ ζ_τ} − X)/τ with γ_τ = exp(τχ), ζ_τ = exp(τυ)."""
    g = exp_field(chi, tau) if chi is not None else None
    z = exp_field(upsilon, tau) if upsilon is not None else None
    Y = _act(X, g, z)
    return (Y.form - X.form) * (1.0 / tau)


# -- dressing fields ----------------------------------------------------------
def dressing_connection(c: LocalCocycle, u: FieldHandle) -> ConnForm:
    """Γ = C(u) dC(u)⁻¹."""
    size = _size(c)
    Cu = c.of(u)
    M = _zero_form_of(Cu, (size, size))
    Minv = _zero_form_of(field_inverse(Cu), (size, size))
    G = wedge(M, exterior_derivative(Minv))
    return ConnForm(LocalForm(1, G.n, G.value_shape, G.field, c.target, False, "Γ"), c)


def _bump(t: Jet) -> Jet:
    """(1 − t²)³ on |t| < 1, extended by zero; a C² bump."""
    if abs(float(np.real(t.value))) >= 1.0:
        return t * 0.0
    s = 1.0 - t * t
    return s * s * s


@dataclass(frozen=True, eq=False)
class PartitionOfUnity:
    """Pointwise-normalized weights δ_i = b_i / Σ_j b_j.

    ``boxes`` gives one (lower, upper) box per chart; ``b_i`` is the product
    of C² bumps over the box.  Alternatively pass explicit ``weights`` fields,
    which are only validated, never renormalized.
    """

    boxes: Sequence = ()
    weights: Sequence[FieldHandle] = ()
    tol: float = 1e-10

    def raw(self, i: int, X) -> Jet:
        lo, hi = (np.asarray(v, float) for v in self.boxes[i])
        mid, half = (lo + hi) / 2, (hi - lo) / 2
        out = None
        for mu in range(len(X)):
            b = _bump((X[mu] - mid[mu]) * (1.0 / half[mu]))
            out = b if out is None else out * b
        return out

    def __len__(self):
        return len(self.weights) if self.weights else len(self.boxes)

    def weight(self, i: int, n: int) -> FieldHandle:
        if self.weights:
            return self.weights[i]

        def fn(X):
            raws = [self.raw(j, X) for j in range(len(self.boxes))]
            total = raws[0]
            for r in raws[1:]:
                total = total + r
            if abs(total.value) < 1e-14:
                raise DomainError(f"point {X.point.tolist()} lies outside every bump support")
            return raws[i] * reciprocal(total)

        return FieldHandle(fn, n, 0, name=f"δ{i}")

    def check(self, points, n: int) -> float:
        worst = 0.0
        for x in points:
            total = sum(lift(self.weight(i, n), x, 0).value for i in range(len(self)))
            worst = max(worst, abs(float(total) - 1.0))
        if worst > self.tol:
            raise BadPartition(f"weights deviate from 1 by {worst:.3e}")
        return worst


def glued_dressing_connection(c: LocalCocycle, dressings: Sequence[FieldHandle], partition: PartitionOfUnity,
                              check_points=None) -> ConnForm:
    """Γ = Σ_i δ_i Γ_i with Γ_i the dressing connection of ``dressings[i]``."""
    if len(dressings) != len(partition):
        raise BadPartition("one weight per dressing field is required")
    n = dressings[0].n_vars
    if check_points is not None:
        partition.check(check_points, n)
    total = None
    for i, u in enumerate(dressings):
        w = _zero_form_of(partition.weight(i, n), ())
        Gi = dressing_connection(c, u).form
        term = wedge(w, Gi, lambda s, m: s[..., None, None] * m)
        total = term if total is None else total + term
    return ConnForm(LocalForm(1, n, total.value_shape, total.field, c.target, False, "Γ"), c)


def max_abs_on(f: LocalForm, points) -> float:
    """max over ``points`` of the largest component magnitude of ``f``."""
    return max(float(np.max(np.abs(f.at(x)))) if f.at(x).size else 0.0 for x in points)
