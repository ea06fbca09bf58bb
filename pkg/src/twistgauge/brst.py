"""BRST differential on a finite Grassmann-ghost algebra.

Two layers:

* symbolic expressions (:class:`Expr`) built from atoms A, F, φ and the
  ghosts, on which ``s`` and ``d`` act as graded derivations by rules;
* numeric :class:`GrassmannElem` values Σ_I ξ_I ω_I over N anticommuting
  generators ξ_a, with LocalForm coefficients, obtained by instantiating
  each atom and each ghost (c = Σ_a ξ_a M_a).

Signs: the total degree is form degree + ghost degree.  Coefficients sit to
the right of the generators, so (ξ_I α)(ξ_J β) = (−1)^{p|J|} ξ_I ξ_J α∧β for
a p-form α, and d(ξ_I ω) = (−1)^{|I|} ξ_I dω.  s and d anticommute.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import GradingError, TwistGaugeError
from .forms import MATMUL, MATVEC, LocalForm, exterior_derivative, wedge
from .jets import FieldHandle

__all__ = [
    "MAX_GHOST_DEGREE",
    "GhostNotInstantiated",
    "GrassmannElem",
    "Expr",
    "atom",
    "ghost",
    "bracket",
    "d",
    "brst",
    "twisted_rules",
    "mixed_rules",
    "BrstSystem",
    "ghost_components",
    "k_ghost_components",
    "evaluate",
    "NilpotencyReport",
    "check_nilpotency",
]

MAX_GHOST_DEGREE = 3


class GhostNotInstantiated(TwistGaugeError, KeyError):
    pass


# -- Grassmann algebra ---------------------------------------------------------------
def _merge(I: tuple, J: tuple) -> tuple[int, tuple]:
    """Sign and sorted monomial of ξ_I ξ_J (sign 0 if a generator repeats)."""
    if set(I) & set(J):
        return 0, ()
    seq = list(I) + list(J)
    inversions = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return (-1 if inversions % 2 else 1), tuple(sorted(seq))


@dataclass(frozen=True, eq=False)
class GrassmannElem:
    """Σ ξ_I ω_I; ``terms`` maps (monomial, form degree) → LocalForm.

    ``kind`` is ``"matrix"`` or ``"vector"`` and fixes which products apply.
    """

    terms: dict = dc_field(default_factory=dict)
    kind: str = "matrix"

    @classmethod
    def from_form(cls, f: LocalForm, monomial: tuple = (), kind: str = "matrix") -> "GrassmannElem":
        return cls({(tuple(monomial), f.degree): f}, kind)

    @classmethod
    def ghost(cls, components, offset: int = 0) -> "GrassmannElem":
        """Σ_a ξ_{offset+a} M_a for 0-form matrix fields M_a."""
        return cls({((offset + a,), 0): M for a, M in enumerate(components)}, "matrix")

    def bidegrees(self) -> set:
        return {(p, len(I)) for (I, p) in self.terms}

    def ghost_degrees(self) -> set:
        return {len(I) for (I, _) in self.terms}

    def _combine(self, other: "GrassmannElem", sign: float) -> "GrassmannElem":
        if self.terms and other.terms and self.kind != other.kind:
            raise GradingError("cannot add matrix- and vector-valued elements")
        out = dict(self.terms)
        for k, v in other.terms.items():
            w = v if sign > 0 else -v
            out[k] = out[k] + w if k in out else w
        return GrassmannElem(out, self.kind if self.terms else other.kind)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __neg__(self):
        return GrassmannElem({k: -v for k, v in self.terms.items()}, self.kind)

    def scale(self, c: float) -> "GrassmannElem":
        return GrassmannElem({k: v * c for k, v in self.terms.items()}, self.kind)

    def mul(self, other: "GrassmannElem") -> "GrassmannElem":
        """Graded product; matrix·matrix or matrix·vector."""
        if self.kind != "matrix":
            raise GradingError("left factor of a product must be matrix valued")
        op = MATMUL if other.kind == "matrix" else MATVEC
        out: dict = {}
        for (I, p), a in self.terms.items():
            for (J, q), b in other.terms.items():
                if len(I) + len(J) > MAX_GHOST_DEGREE or p + q > a.n:
                    continue
                sgn, K = _merge(I, J)
                if sgn == 0:
                    continue
                sgn *= -1 if (p * len(J)) % 2 else 1
                term = wedge(a, b, op)
                if term.is_zero:
                    continue
                term = term if sgn > 0 else -term
                key = (K, p + q)
                out[key] = out[key] + term if key in out else term
        return GrassmannElem(out, other.kind)

    def d(self) -> "GrassmannElem":
        out = {}
        for (I, p), a in self.terms.items():
            if p + 1 > a.n:
                continue
            da = exterior_derivative(a)
            out[(I, p + 1)] = da if len(I) % 2 == 0 else -da
        return GrassmannElem(out, self.kind)

    def restrict(self, generators) -> "GrassmannElem":
        """Keep monomials containing at least one of ``generators``."""
        gens = set(generators)
        return GrassmannElem({k: v for k, v in self.terms.items() if gens & set(k[0])}, self.kind)

    def coefficient(self, monomial: tuple, degree: int) -> LocalForm | None:
        return self.terms.get((tuple(sorted(monomial)), degree))

    def max_abs(self, points) -> float:
        worst = 0.0
        for f in self.terms.values():
            if f.is_zero:
                continue
            for x in points:
                v = f.at(x)
                if v.size:
                    worst = max(worst, float(np.max(np.abs(v))))
        return worst


# -- symbolic layer ----------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class Expr:
    """Node of a polynomial expression in fields and ghosts."""

    op: str
    args: tuple = ()
    name: str = ""
    form_degree: int = 0
    ghost_degree: int = 0
    kind: str = "matrix"
    coef: float = 1.0

    @property
    def total(self) -> int:
        return self.form_degree + self.ghost_degree

    def __add__(self, other: "Expr") -> "Expr":
        return _sum([(1.0, self), (1.0, other)])

    def __sub__(self, other: "Expr") -> "Expr":
        return _sum([(1.0, self), (-1.0, other)])

    def __neg__(self) -> "Expr":
        return _sum([(-1.0, self)])

    def __mul__(self, other):
        if isinstance(other, Expr):
            return _prod(self, other)
        return _sum([(float(other), self)])

    __rmul__ = lambda self, c: _sum([(float(c), self)])

    def bidegree(self) -> tuple[int, int]:
        return self.form_degree, self.ghost_degree


ZERO = Expr("zero")


def atom(name: str, form_degree: int, ghost_degree: int = 0, kind: str = "matrix") -> Expr:
    return Expr("atom", (), name, form_degree, ghost_degree, kind)


def ghost(name: str = "c") -> Expr:
    return atom(name, 0, 1)


def _sum(items) -> Expr:
    flat = []
    for c, e in items:
        if e.op == "zero" or c == 0:
            continue
        if e.op == "sum":
            flat.extend((c * cc, ee) for cc, ee in e.args)
        else:
            flat.append((c, e))
    if not flat:
        return ZERO
    if len(flat) == 1 and flat[0][0] == 1.0:
        return flat[0][1]
    e0 = flat[0][1]
    return Expr("sum", tuple(flat), "", e0.form_degree, e0.ghost_degree, e0.kind)


def _prod(x: Expr, y: Expr) -> Expr:
    if x.op == "zero" or y.op == "zero":
        return ZERO
    if x.kind != "matrix":
        raise GradingError("left factor of a product must be matrix valued")
    return Expr("prod", (x, y), "", x.form_degree + y.form_degree, x.ghost_degree + y.ghost_degree, y.kind)


def bracket(x: Expr, y: Expr) -> Expr:
    """Graded commutator [x, y] = xy − (−1)^{|x||y|} yx."""
    sign = -1.0 if (x.total * y.total) % 2 else 1.0
    return _sum([(1.0, _prod(x, y)), (-sign, _prod(y, x))])


def d(x: Expr) -> Expr:
    if x.op == "zero":
        return ZERO
    if x.op == "d":
        return ZERO
    return Expr("d", (x,), "", x.form_degree + 1, x.ghost_degree, x.kind)


def twisted_rules(c: Expr | None = None) -> dict:
    """s on A, F, φ and the ghost c: sA = −dc − [A,c], sF = [F,c], sφ = −cφ, sc = −½[c,c]."""
    c = ghost("c") if c is None else c
    A, F, phi = atom("A", 1), atom("F", 2), atom("phi", 0, 0, "vector")
    return {
        "A": -d(c) - bracket(A, c),
        "F": bracket(F, c),
        "phi": -_prod(c, phi),
        "c": -0.5 * bracket(c, c),
    }


def mixed_rules() -> dict:
    """Total ghost c + υ; sc = −½[c,c] − [c,υ], sυ = −½[υ,υ]."""
    c, v = ghost("c"), ghost("v")
    tot = c + v
    A, F, phi = atom("A", 1), atom("F", 2), atom("phi", 0, 0, "vector")
    return {
        "A": -d(tot) - bracket(A, tot),
        "F": bracket(F, tot),
        "phi": -_prod(tot, phi),
        "c": -0.5 * bracket(c, c) - bracket(c, v),
        "v": -0.5 * bracket(v, v),
    }


def brst(x: Expr, rules: dict) -> Expr:
    """s as a graded derivation, anticommuting with d."""
    if x.op == "zero":
        return ZERO
    if x.op == "atom":
        if x.name not in rules:
            raise GhostNotInstantiated(f"no BRST rule for {x.name!r}")
        out = rules[x.name]
    elif x.op == "sum":
        out = _sum([(c, brst(e, rules)) for c, e in x.args])
    elif x.op == "prod":
        a, b = x.args
        sign = -1.0 if a.total % 2 else 1.0
        out = _sum([(1.0, _prod(brst(a, rules), b)), (sign, _prod(a, brst(b, rules)))])
    elif x.op == "d":
        out = -d(brst(x.args[0], rules))
    else:
        raise TypeError(f"unknown node {x.op}")
    if out.op != "zero" and out.ghost_degree != x.ghost_degree + 1:
        raise GradingError(f"s raised ghost degree {x.ghost_degree} to {out.ghost_degree}")
    return out


def ghost_components(cocycle, chis) -> list:
    """M_a = c(χ_a), the linearized cocycle on each ghost component field."""
    return [_as_zero_form(cocycle.diff_of(chi), cocycle.target.dim) for chi in chis]


def k_ghost_components(cocycle, upsilons) -> list:
    """V_b = embedded K-algebra fields υ_b."""
    if cocycle.k_embed_alg is None:
        raise GhostNotInstantiated(f"cocycle {cocycle.name!r} has no K sector")
    emb = cocycle.k_embed_alg
    return [
        _as_zero_form(FieldHandle(lambda X, u=u: emb(u(X)), u.n_vars, u.depth, name="υ"), cocycle.target.dim)
        for u in upsilons
    ]


def _as_zero_form(f: FieldHandle, size: int) -> LocalForm:
    return LocalForm(0, f.n_vars, (size, size), f, None, False, f.name)


# -- evaluation --------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class BrstSystem:
    """Instantiation of atoms and ghosts as Grassmann elements."""

    env: dict
    h_generators: tuple = ()
    k_generators: tuple = ()

    @classmethod
    def build(cls, A: LocalForm, phi: LocalForm | None, F: LocalForm | None, c_components, v_components=()):
        """Ghost c = Σ ξ_a M_a over the H generators, υ = Σ ξ_b V_b over the K generators."""
        env = {"A": GrassmannElem.from_form(A)}
        if F is not None:
            env["F"] = GrassmannElem.from_form(F)
        if phi is not None:
            env["phi"] = GrassmannElem.from_form(phi, kind="vector")
        m = len(c_components)
        env["c"] = GrassmannElem.ghost(c_components)
        if v_components:
            env["v"] = GrassmannElem.ghost(v_components, offset=m)
        return cls(env, tuple(range(m)), tuple(range(m, m + len(v_components))))


def evaluate(x: Expr, sysm: BrstSystem) -> GrassmannElem:
    if x.op == "zero":
        return GrassmannElem({}, x.kind)
    if x.op == "atom":
        if x.name not in sysm.env:
            raise GhostNotInstantiated(f"{x.name!r} is not instantiated")
        return sysm.env[x.name]
    if x.op == "sum":
        out = GrassmannElem({}, x.kind)
        for c, e in x.args:
            out = out + evaluate(e, sysm).scale(c)
        return out
    if x.op == "prod":
        return evaluate(x.args[0], sysm).mul(evaluate(x.args[1], sysm))
    if x.op == "d":
        return evaluate(x.args[0], sysm).d()
    raise TypeError(f"unknown node {x.op}")


@dataclass
class NilpotencyReport:
    residuals: dict
    tolerance: float
    passed: bool


def check_nilpotency(sysm: BrstSystem, rules: dict, points, names=None, tol: float = 1e-10) -> NilpotencyReport:
    """max |s²X| over ``points`` for each instantiated atom X."""
    names = names or [n for n in ("A", "F", "phi", "c", "v") if n in sysm.env and n in rules]
    kinds = {"phi": "vector"}
    degs = {"A": (1, 0), "F": (2, 0), "phi": (0, 0), "c": (0, 1), "v": (0, 1)}
    res = {}
    for n in names:
        p, g = degs[n]
        x = atom(n, p, g, kinds.get(n, "matrix"))
        res[n] = evaluate(brst(brst(x, rules), rules), sysm).max_abs(points)
    return NilpotencyReport(res, tol, all(v <= tol for v in res.values()))
