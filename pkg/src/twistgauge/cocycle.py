"""Local group-action cocycles evaluated on jets of gauge fields.

A gauge field is a :class:`~twistgauge.jets.FieldHandle` returning a matrix
jet valued in the source group ``H``.  A :class:`LocalCocycle` turns it into
a target-valued field ``C(γ)``.  Cocycles that read first derivatives of
``γ`` (tractor, twistor, the abelian scalar one) have ``jet_order = 1`` and
lower the jet order of their input by one.

Section dependence is modelled by frame data: the tractor and twistor
cocycles read a vielbein ``e[a, μ] = e^a_μ`` and its inverse
``E[μ, a] = e^μ_a`` (so ``e^μ_a e^a_ν = δ^μ_ν``).  Moving the section by a
gauge field transforms that frame, which gives an independent route to the
composition law ``C(γ)^η = C(η)⁻¹ C(γη)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import CocycleViolation, IncompatibleCocycle, NotInGroup, TwistGaugeError
from .jets import FieldHandle, Jet, as_jet, einsum, grad, jexp, jexpm, jinv, jpow, lift, matrix, reciprocal, stack
from .lie import ETA, SIGMA, GroupSpec, cstar, lorentz_embed, so13, sl2c, spin_embed, su2
from . import lie

__all__ = [
    "GaugeJet",
    "LocalCocycle",
    "MorphismCocycle",
    "TractorCocycle",
    "TwistorCocycle",
    "AbelianCocycle",
    "field_product",
    "field_inverse",
    "constant_field",
    "exp_field",
    "gauge_jet_field",
    "evaluate",
    "gauge_compose",
    "diff_at_identity",
    "diff_at_identity_fd",
    "k_conjugation",
    "id1_residual",
    "double_cover_jet",
    "catalog",
]


# -- field helpers --------------------------------------------------------------
def field_product(*fields: FieldHandle) -> FieldHandle:
    """Pointwise matrix product γ1·γ2·…, derivatives by the Leibniz rule."""
    n = fields[0].n_vars

    def fn(X):
        out = fields[0](X)
        for f in fields[1:]:
            out = out @ f(X)
        return out

    return FieldHandle(fn, n, max(f.depth for f in fields), name="*".join(f.name for f in fields))


def field_inverse(f: FieldHandle) -> FieldHandle:
    return FieldHandle(lambda X: jinv(f(X)), f.n_vars, f.depth, name=f"{f.name}^-1")


def constant_field(M, n: int) -> FieldHandle:
    M = np.asarray(M)
    return FieldHandle(lambda X: X.const(M), n, 0, name="const")


def exp_field(chi: FieldHandle, scale: float = 1.0) -> FieldHandle:
    """x ↦ exp(scale·χ(x)) for an algebra-valued field χ."""
    return FieldHandle(lambda X: jexpm(chi(X) * scale), chi.n_vars, chi.depth, name=f"exp({chi.name})")


@dataclass(frozen=True)
class GaugeJet:
    """Value and first derivatives of a group-valued field at one point.

    ``d1[μ]`` is ∂_μγ(x).
    """

    point: np.ndarray
    value: np.ndarray
    d1: np.ndarray
    group: GroupSpec

    def __post_init__(self):
        if not self.group.contains(self.value):
            raise NotInGroup(f"gauge jet value is not in {self.group.name}")
        mc = np.linalg.solve(self.value[None], self.d1) if self.d1.size else self.d1
        for m in mc:
            if not self.group.in_algebra(m, tol=1e-9):
                raise NotInGroup(f"γ⁻¹∂γ is not in the algebra of {self.group.name}")

    @classmethod
    def from_field(cls, field: FieldHandle, x, group: GroupSpec) -> "GaugeJet":
        j = lift(field, x, 1)
        return cls(np.asarray(x, float), j.value, j.parts[1], group)

    def as_field(self) -> FieldHandle:
        """The affine field γ(x) + (y − x)^μ ∂_μγ reproducing this 1-jet at ``point``."""
        x0, v, d1 = self.point, self.value, self.d1

        def fn(X):
            out = X.const(v)
            for mu in range(len(X)):
                out = out + (X[mu] - float(x0[mu])) * d1[mu]
            return out

        return FieldHandle(fn, len(x0), 0, name="gauge-jet")


def gauge_jet_field(group: GroupSpec, rng: np.random.Generator, n: int, degree: int = 2, scale: float = 0.3,
                    terms: int = 3) -> FieldHandle:
    """A random group-valued field exp(χ(x)) with χ a random polynomial in the algebra."""
    chi = random_algebra_field(group, rng, n, degree, scale, terms)
    return exp_field(chi)


def random_algebra_field(group: GroupSpec, rng: np.random.Generator, n: int, degree: int = 2, scale: float = 0.3,
                         terms: int = 3) -> FieldHandle:
    """Random polynomial field valued in the algebra of ``group``."""
    monomials = []
    for _ in range(terms):
        powers = rng.integers(0, degree + 1, size=n)
        while powers.sum() > degree:
            powers[rng.choice(np.flatnonzero(powers))] -= 1
        monomials.append((tuple(int(p) for p in powers), group.random_algebra(rng, scale)))
    const = group.random_algebra(rng, scale)

    def fn(X):
        out = X.const(const)
        for powers, coeff in monomials:
            term = None
            for mu, p in enumerate(powers):
                if p:
                    t = X[mu] ** p
                    term = t if term is None else term * t
            out = out + (coeff if term is None else term * coeff)
        return out

    return FieldHandle(fn, n, 0, name="chi")


# -- cocycles -------------------------------------------------------------------
class LocalCocycle:
    """Base class.  Subclasses implement :meth:`apply` and :meth:`diff`."""

    name = "cocycle"
    jet_order = 0

    def __init__(self, source: GroupSpec, target: GroupSpec, frame: FieldHandle | None = None,
                 k_group: GroupSpec | None = None, k_embed: Callable | None = None):
        self.source = source
        self.target = target
        self.frame = frame
        self.k_group = k_group
        self.k_embed = k_embed
        self.k_embed_alg = getattr(self, "k_embed_alg", None)

    # pointwise evaluators: X are coordinates, g / chi are jets at X
    def apply(self, X, g: Jet) -> Jet:
        raise NotImplementedError

    def diff(self, X, chi: Jet) -> Jet:
        """c(χ) = dC_|e(χ) for an algebra-valued jet χ."""
        raise NotImplementedError

    @property
    def frame_depth(self) -> int:
        return self.frame.depth if self.frame is not None else 0

    def of(self, gamma: FieldHandle) -> FieldHandle:
        """The target-valued field x ↦ C(γ)(x)."""
        depth = max(gamma.depth + self.jet_order, self.frame_depth)
        return FieldHandle(lambda X: self.apply(X, gamma(X)), gamma.n_vars, depth, name=f"C({gamma.name})")

    def diff_of(self, chi: FieldHandle) -> FieldHandle:
        depth = max(chi.depth + self.jet_order, self.frame_depth)
        return FieldHandle(lambda X: self.diff(X, chi(X)), chi.n_vars, depth, name=f"c({chi.name})")

    def moved(self, gamma: FieldHandle) -> "LocalCocycle":
        """Cocycle for the section σγ: h ↦ C(γ)⁻¹ C(γh)."""
        return _FormulaMoved(self, gamma)

    def k_moved(self, zeta: FieldHandle) -> "LocalCocycle":
        """Cocycle for the section σζ with ζ valued in K: h ↦ ζ⁻¹ C(h) ζ."""
        self._require_k()
        return _KConjugated(self, zeta)

    def embed_k(self, zeta_jet: Jet) -> Jet:
        self._require_k()
        return self.k_embed(zeta_jet)

    def _require_k(self):
        if self.k_group is None or self.k_embed is None:
            raise IncompatibleCocycle(f"{self.name} cocycle is not declared K-compatible")

    def _need_frame(self):
        if self.frame is None:
            raise TwistGaugeError(f"{self.name} cocycle needs frame data (a vielbein field)")
        return self.frame

    def __repr__(self):
        return f"{type(self).__name__}({self.source.name} -> {self.target.name})"


class _FormulaMoved(LocalCocycle):
    def __init__(self, base: LocalCocycle, gamma: FieldHandle):
        super().__init__(base.source, base.target, base.frame, base.k_group, base.k_embed)
        self.k_embed_alg = base.k_embed_alg
        self.base, self.gamma = base, gamma
        self.name = f"{base.name}^moved"
        self.jet_order = base.jet_order

    @property
    def frame_depth(self):
        return max(self.base.frame_depth, self.gamma.depth + self.base.jet_order)

    def apply(self, X, g):
        gam = self.gamma(X)
        return jinv(self.base.apply(X, gam)) @ self.base.apply(X, gam @ g)

    def diff(self, X, chi):
        raise NotImplementedError("moved cocycles have no closed-form differential; use diff_at_identity_fd")


class _KConjugated(LocalCocycle):
    def __init__(self, base: LocalCocycle, zeta: FieldHandle):
        super().__init__(base.source, base.target, base.frame, base.k_group, base.k_embed)
        self.k_embed_alg = base.k_embed_alg
        self.base, self.zeta = base, zeta
        self.name = f"{base.name}^K"
        self.jet_order = base.jet_order

    @property
    def frame_depth(self):
        return max(self.base.frame_depth, self.zeta.depth)

    def apply(self, X, g):
        Z = self.k_embed(self.zeta(X))
        return jinv(Z) @ self.base.apply(X, g) @ Z

    def diff(self, X, chi):
        Z = self.k_embed(self.zeta(X))
        return jinv(Z) @ self.base.diff(X, chi) @ Z


class MorphismCocycle(LocalCocycle):
    """C(h) = ρ(h) for a group morphism ρ; jet independent.

    ``rho`` and ``rho_star`` act on jets or arrays; both default to the
    identity representation.
    """

    name = "morphism"
    jet_order = 0

    def __init__(self, source: GroupSpec, target: GroupSpec | None = None, rho=None, rho_star=None,
                 k_group=None, k_embed=None):
        super().__init__(source, target or source, None, k_group, k_embed)
        self.rho = rho or (lambda h: h)
        self.rho_star = rho_star or (lambda x: x)

    def apply(self, X, g):
        return as_jet(self.rho(g), X.n_vars, X.order)

    def diff(self, X, chi):
        return as_jet(self.rho_star(chi), X.n_vars, X.order)

    def moved(self, gamma):
        # ρ(γ)⁻¹ρ(γh) = ρ(h): section independent
        return self


def _upsilon(g: Jet, E: Jet) -> tuple[Jet, Jet]:
    """z and Υ_a = z⁻¹ ∂_μz e^μ_a from a (1,1) jet of z."""
    z = g[0, 0]
    dz = grad(z)  # (n,)
    ups = einsum("...m,...ma->...a", dz * reciprocal(z.truncate(dz.order)), E)
    return z, ups


def _frame_inverse(X, frame: FieldHandle) -> Jet:
    e = frame(X)
    if np.linalg.cond(e.value) > 1e8:
        from .errors import DegenerateSoldering

        raise DegenerateSoldering("vielbein is degenerate (condition number above 1e8)", [X.point.tolist()])
    return jinv(e)


def _tractor_matrix(z: Jet, ups: Jet) -> Jet:
    """[[z, Υ, ΥΥ^t/(2z)], [0, 1, Υ^t/z], [0, 0, 1/z]] with Υ^t = ηΥ."""
    order = min(z.order, ups.order)
    z = z.truncate(order)
    ups = ups.truncate(order)
    iz = reciprocal(z)
    upt = ups.map_linear(lambda p: p @ ETA)
    sq = einsum("...a,...a->...", ups, upt)
    n = z.n_vars
    zero, one = np.zeros(()), np.ones(())
    rows = [[z] + [ups[a] for a in range(4)] + [sq * iz * 0.5]]
    for a in range(4):
        rows.append([zero] + [one if b == a else zero for b in range(4)] + [upt[a] * iz])
    rows.append([zero] * 5 + [iz])
    return matrix(rows)


class TractorCocycle(LocalCocycle):
    """Weyl-dilation cocycle into the tractor group, reading a vielbein frame."""

    name = "tractor"
    jet_order = 1

    def __init__(self, frame: FieldHandle | None, mixed: bool = True):
        target = lie.tractor_G_SO() if mixed else lie.tractor_G()
        emb = (lambda S: _embed_lorentz(S)) if mixed else None
        super().__init__(lie.weyl_dilations(), target, frame, so13() if mixed else None, emb)
        self.k_embed_alg = _embed_lorentz_alg if mixed else None

    def apply(self, X, g):
        E = _frame_inverse(X, self._need_frame())
        z, ups = _upsilon(g, E)
        return _tractor_matrix(z, ups)

    def diff(self, X, chi):
        E = _frame_inverse(X, self._need_frame())
        eps = chi[0, 0]
        deps = einsum("...m,...ma->...a", grad(eps), E)
        eps = eps.truncate(deps.order)
        zero = np.zeros(())
        upt = deps.map_linear(lambda p: p @ ETA)
        rows = [[eps] + [deps[a] for a in range(4)] + [zero]]
        for a in range(4):
            rows.append([zero] * 5 + [upt[a]])
        rows.append([zero] * 5 + [-eps])
        return matrix(rows)

    def moved(self, gamma):
        """Section σγ: the frame becomes γ·e (Υ scales by 1/γ)."""
        e = self._need_frame()
        frame = FieldHandle(lambda X: gamma(X)[0, 0] * e(X), e.n_vars, max(e.depth, gamma.depth), name="z e")
        return TractorCocycle(frame, mixed=self.k_group is not None)

    def k_moved(self, zeta):
        """Section σ𝖲: the frame becomes S⁻¹e (Υ ↦ ΥS)."""
        self._require_k()
        e = self._need_frame()
        frame = FieldHandle(lambda X: jinv(zeta(X)) @ e(X), e.n_vars, max(e.depth, zeta.depth), name="S^-1 e")
        return TractorCocycle(frame, mixed=True)


def _embed_lorentz(S):
    if isinstance(S, Jet):
        pad = np.zeros((6, 6))
        pad[0, 0] = pad[5, 5] = 1
        basis = np.zeros((4, 4, 6, 6))
        for a in range(4):
            for b in range(4):
                basis[a, b, 1 + a, 1 + b] = 1
        return einsum("...ab,abij->...ij", S, basis) + pad
    return lorentz_embed(S)


def _embed_lorentz_alg(s):
    """diag(0, s, 0)."""
    basis = np.zeros((4, 4, 6, 6))
    for a in range(4):
        for b in range(4):
            basis[a, b, 1 + a, 1 + b] = 1
    if isinstance(s, Jet):
        return einsum("...ab,abij->...ij", s, basis)
    return lorentz_embed(s, algebra=True)


def _embed_spin_alg(sb):
    """diag(−s̄*, s̄)."""
    top = np.zeros((2, 2, 4, 4))
    bot = np.zeros((2, 2, 4, 4))
    for i in range(2):
        for j in range(2):
            top[i, j, i, j] = 1
            bot[i, j, 2 + i, 2 + j] = 1
    if isinstance(sb, Jet):
        return einsum("...ij,ijkl->...kl", -sb.conj().swapaxes(-1, -2), top) + einsum("...ij,ijkl->...kl", sb, bot)
    sb = np.asarray(sb, dtype=complex)
    out = np.zeros(sb.shape[:-2] + (4, 4), dtype=complex)
    out[..., :2, :2] = -np.conj(np.swapaxes(sb, -1, -2))
    out[..., 2:, 2:] = sb
    return out


def double_cover_jet(Sb: Jet) -> Jet:
    """S^a_b = 2 Re Tr(σ_a S̄ σ_b S̄*) on jets."""
    left = Sb.map_linear(lambda p: np.einsum("aij,...jk->...aik", SIGMA, p))
    right = Sb.conj().swapaxes(-1, -2).map_linear(lambda p: np.einsum("bkl,...li->...bki", SIGMA, p))
    prod = einsum("...aik,...bki->...ab", left, right)
    return prod.real * 2.0


def _embed_spin(Sb):
    if isinstance(Sb, Jet):
        inv_star = jinv(Sb).conj().swapaxes(-1, -2)
        top = np.zeros((2, 2, 4, 4))
        bot = np.zeros((2, 2, 4, 4))
        for i in range(2):
            for j in range(2):
                top[i, j, i, j] = 1
                bot[i, j, 2 + i, 2 + j] = 1
        return einsum("...ij,ijkl->...kl", inv_star, top) + einsum("...ij,ijkl->...kl", Sb, bot)
    return spin_embed(Sb)


def _twistor_matrix(z: Jet, ups_hat: Jet) -> Jet:
    order = min(z.order, ups_hat.order)
    z, ups_hat = z.truncate(order), ups_hat.truncate(order)
    rz = jpow(z, 0.5)
    irz = reciprocal(rz)
    top = np.zeros((4, 4))
    top[0, 0] = top[1, 1] = 1
    bot = np.zeros((4, 4))
    bot[2, 2] = bot[3, 3] = 1
    tr = np.zeros((2, 2, 4, 4))
    for i in range(2):
        for j in range(2):
            tr[i, j, i, 2 + j] = 1
    off = einsum("...ij,ijkl->...kl", ups_hat * irz * (-1j), tr)
    return rz * top + irz * bot + off


class TwistorCocycle(LocalCocycle):
    """Weyl-dilation cocycle into the twistor group.

    Translations enter as Ῡ = covector_bar(Υ) = Υ_a·Pauli_a.
    """

    name = "twistor"
    jet_order = 1

    def __init__(self, frame: FieldHandle | None, mixed: bool = True):
        target = lie.twistor_G_SL() if mixed else lie.twistor_G()
        super().__init__(lie.weyl_dilations(), target, frame, sl2c() if mixed else None,
                         _embed_spin if mixed else None)
        self.k_embed_alg = _embed_spin_alg if mixed else None

    def apply(self, X, g):
        E = _frame_inverse(X, self._need_frame())
        z, ups = _upsilon(g, E)
        return _twistor_matrix(z, _covector_bar_jet(ups))

    def diff(self, X, chi):
        E = _frame_inverse(X, self._need_frame())
        eps = chi[0, 0].real if np.iscomplexobj(chi.value) else chi[0, 0]
        deps = einsum("...m,...ma->...a", grad(eps), E)
        eps = eps.truncate(deps.order)
        diag = np.diag([0.5, 0.5, -0.5, -0.5])
        tr = np.zeros((2, 2, 4, 4))
        for i in range(2):
            for j in range(2):
                tr[i, j, i, 2 + j] = 1
        return eps * diag + einsum("...ij,ijkl->...kl", _covector_bar_jet(deps) * (-1j), tr)

    def moved(self, gamma):
        e = self._need_frame()
        frame = FieldHandle(lambda X: gamma(X)[0, 0] * e(X), e.n_vars, max(e.depth, gamma.depth), name="z e")
        return TwistorCocycle(frame, mixed=self.k_group is not None)

    def k_moved(self, zeta):
        """Section σ𝖲̄: the frame becomes S⁻¹e with S the double-cover image of S̄."""
        self._require_k()
        e = self._need_frame()
        frame = FieldHandle(lambda X: jinv(double_cover_jet(zeta(X))) @ e(X), e.n_vars, max(e.depth, zeta.depth),
                            name="S^-1 e")
        return TwistorCocycle(frame, mixed=True)


def _covector_bar_jet(r: Jet) -> Jet:
    return einsum("...a,aij->...ij", r, 2.0 * SIGMA)


class AbelianCocycle(LocalCocycle):
    """C(h) = h^q · exp(iλ v^μ h⁻¹∂_μh) on nonzero complex scalars.

    ``q`` is an integer and ``v`` a constant vector; since the logarithmic
    derivative is additive, C(ab) = C(a)C(b) and the cocycle is section
    independent, yet it depends on the 1-jet of h.
    """

    name = "abelian"
    jet_order = 1

    def __init__(self, v, q: int = 1, lam: float = 1.0):
        super().__init__(cstar(), cstar())
        self.v = np.asarray(v, dtype=float)
        self.q = int(q)
        self.lam = float(lam)

    def apply(self, X, g):
        h = g[0, 0]
        dh = grad(h)
        mc = einsum("...m,m->...", dh, self.v) * reciprocal(h.truncate(dh.order))
        hq = h.truncate(dh.order) ** self.q if self.q >= 0 else reciprocal(h.truncate(dh.order)) ** (-self.q)
        return (hq * jexp(mc * (1j * self.lam))).reshape(1, 1)

    def diff(self, X, chi):
        c = chi[0, 0]
        dc = einsum("...m,m->...", grad(c), self.v)
        return (c.truncate(dc.order) * self.q + dc * (1j * self.lam)).reshape(1, 1)

    def moved(self, gamma):
        return self


# -- public operations -------------------------------------------------------------
def _as_field(gamma, n=None) -> FieldHandle:
    if isinstance(gamma, FieldHandle):
        return gamma
    if isinstance(gamma, GaugeJet):
        return gamma.as_field()
    raise TypeError("expected a FieldHandle or GaugeJet")


def evaluate(c: LocalCocycle, x, gamma) -> np.ndarray:
    """C_σ(γ) at ``x``."""
    return lift(c.of(_as_field(gamma)), x, 0).value


def gauge_compose(c: LocalCocycle, x, gamma, eta) -> np.ndarray:
    """C_σ(γ)^η = C_σ(η)⁻¹ C_σ(γη) at ``x`` (formula route)."""
    g, h = _as_field(gamma), _as_field(eta)
    return lift(FieldHandle(lambda X: jinv(c.apply(X, h(X))) @ c.apply(X, g(X) @ h(X)), g.n_vars,
                            max(g.depth, h.depth) + c.jet_order), x, 0).value


def diff_at_identity(c: LocalCocycle, x, chi) -> np.ndarray:
    return lift(c.diff_of(_as_field(chi)), x, 0).value


def diff_at_identity_fd(c: LocalCocycle, x, chi: FieldHandle, tau: float = 1e-6) -> np.ndarray:
    """Central difference of C(exp(τχ)) at τ = 0."""
    plus = evaluate(c, x, exp_field(chi, tau))
    minus = evaluate(c, x, exp_field(chi, -tau))
    return (plus - minus) / (2 * tau)


def k_conjugation(c: LocalCocycle, x, gamma, zeta, route: str = "frame") -> np.ndarray:
    """C(γ)^ζ; ``route='frame'`` moves the frame, ``'conjugate'`` computes ζ⁻¹C(γ)ζ."""
    g, z = _as_field(gamma), _as_field(zeta)
    if route == "frame":
        return evaluate(c.k_moved(z), x, g)
    if route == "conjugate":
        c._require_k()
        return lift(FieldHandle(lambda X: jinv(c.embed_k(z(X))) @ c.apply(X, g(X)) @ c.embed_k(z(X)), g.n_vars,
                                max(g.depth + c.jet_order, z.depth, c.frame_depth)), x, 0).value
    raise ValueError(f"unknown route {route!r}")


def id1_residual(rho: Callable[[Jet], Jet], X_alg: np.ndarray, Y_alg: np.ndarray) -> float:
    """Mixed-partial commutator identity for a representation ρ.

    Compares ∂_t ρ(e^{t[X,Y]}) with ∂_σ∂_τ(ρ(e^{σX}e^{τY}) − ρ(e^{τY}e^{σX})) at
    the origin using jets in the group parameters.
    """
    from .jets import Coords

    P = Coords([0.0, 0.0], 2)
    s, t = P[0], P[1]
    eX = jexpm(s * X_alg)
    eY = jexpm(t * Y_alg)
    mixed = rho(eX @ eY) - rho(eY @ eX)
    rhs = mixed.partial((0, 1))
    br = X_alg @ Y_alg - Y_alg @ X_alg
    lhs = rho(jexpm(s * br)).partial((0,))
    return float(np.max(np.abs(lhs - rhs)))


def catalog(frame: FieldHandle | None = None) -> dict:
    """The built-in cocycles; tractor/twistor ones read ``frame``."""
    return {
        "morphism-su2": MorphismCocycle(su2()),
        "morphism-lorentz": MorphismCocycle(so13(), k_group=None),
        "tractor": TractorCocycle(frame),
        "twistor": TwistorCocycle(frame),
        "abelian": AbelianCocycle(v=np.array([0.3, -0.7, 0.2, 0.5]), q=2, lam=0.8),
    }
