"""Differential forms on coordinate charts, evaluated lazily through jets.

A degree-``k`` form with value shape ``V`` is stored through a component
field returning a :class:`~twistgauge.jets.Jet` of shape ``(n,)*k + V``,
dense and fully antisymmetric in the first ``k`` axes.  The normalization is

    a = (1/k!) a_{μ1…μk} dx^{μ1}∧…∧dx^{μk},

so ``a(v1, …, vk) = a_{μ1…μk} v1^{μ1}…vk^{μk}``.

Orientation is ``ε_{01…n-1} = +1``; Lorentzian metrics use signature
``(+, -, -, -)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateMetric, DegreeOverflow, ShapeMismatch, UnsupportedOrder
from .jets import MAX_ORDER, Coords, FieldHandle, Jet, bilinear, grad, jdet, jinv, jsqrt, stack

__all__ = [
    "Chart",
    "LocalForm",
    "MetricField",
    "form",
    "zero_form",
    "constant_form",
    "scalar_field",
    "form_from_coefficients",
    "exterior_derivative",
    "wedge",
    "wedge_bracket",
    "hodge_star",
    "pullback",
    "evaluate",
    "levi_civita",
    "antisymmetrize",
    "MATMUL",
    "MUL",
    "MATVEC",
]


@dataclass(frozen=True)
class Chart:
    """A box-shaped coordinate chart."""

    dim: int
    lower: tuple
    upper: tuple
    names: tuple = ()

    def __post_init__(self):
        if self.dim < 1:
            raise ShapeMismatch("chart dimension must be positive")
        lo, hi = np.asarray(self.lower, float), np.asarray(self.upper, float)
        if lo.shape != (self.dim,) or hi.shape != (self.dim,):
            raise ShapeMismatch("chart bounds must have one entry per coordinate")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(hi > lo)):
            raise ShapeMismatch("chart bounds must be finite with lower < upper")
        object.__setattr__(self, "lower", tuple(lo))
        object.__setattr__(self, "upper", tuple(hi))
        if not self.names:
            object.__setattr__(self, "names", tuple(f"x{i}" for i in range(self.dim)))

    @classmethod
    def box(cls, dim: int, half_width: float = 1.0) -> "Chart":
        return cls(dim, (-half_width,) * dim, (half_width,) * dim)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(count, self.dim))

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))


# -- value-level bilinear operations --------------------------------------
def MATMUL(x, y):
    return np.matmul(x, y)


def MUL(x, y):
    return np.multiply(x, y)


def MATVEC(x, y):
    return np.einsum("...ij,...j->...i", x, y)


_OUT_SHAPE = {
    MATMUL: lambda va, vb: np.broadcast_shapes(va[:-2], vb[:-2]) + (va[-2], vb[-1]),
    MUL: lambda va, vb: np.broadcast_shapes(va, vb),
    MATVEC: lambda va, vb: np.broadcast_shapes(va[:-2], vb[:-1]) + (va[-2],),
}


def _out_shape(op, va, vb):
    if op in _OUT_SHAPE:
        return _OUT_SHAPE[op](tuple(va), tuple(vb))
    return np.shape(op(np.zeros(va), np.zeros(vb)))


# -- antisymmetrization ------------------------------------------------------
@lru_cache(maxsize=None)
def _perms(k: int):
    out = []
    for p in itertools.permutations(range(k)):
        inv = sum(1 for i in range(k) for j in range(i + 1, k) if p[i] > p[j])
        out.append((p, -1.0 if inv % 2 else 1.0))
    return out


def _alt_array(arr: np.ndarray, lead: int, k: int) -> np.ndarray:
    """Antisymmetrize axes lead..lead+k-1 of ``arr`` (weight 1/k!)."""
    if k < 2:
        return arr
    acc = None
    for p, sgn in _perms(k):
        axes = list(range(arr.ndim))
        axes[lead : lead + k] = [lead + i for i in p]
        term = np.transpose(arr, axes)
        acc = sgn * term if acc is None else acc + sgn * term
    return acc / math.factorial(k)


def antisymmetrize(j: Jet, k: int) -> Jet:
    """Alternating projection on the first ``k`` value axes of a jet."""
    if k < 2:
        return j
    return Jet([_alt_array(p, r, k) for r, p in enumerate(j.parts)], j.n_vars, symmetrize=False)


@lru_cache(maxsize=None)
def levi_civita(n: int) -> np.ndarray:
    eps = np.zeros((n,) * n)
    for p, sgn in _perms(n):
        eps[p] = sgn
    return eps


# -- forms --------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class LocalForm:
    """Degree-``degree`` form on an ``n``-dimensional chart with values of shape ``value_shape``."""

    degree: int
    n: int
    value_shape: tuple
    field: FieldHandle
    algebra: object = None
    is_zero: bool = False
    name: str = dc_field(default="")

    def __post_init__(self):
        object.__setattr__(self, "value_shape", tuple(self.value_shape))
        if self.degree < 0:
            raise ShapeMismatch("negative form degree")

    # evaluation
    @property
    def depth(self) -> int:
        return self.field.depth

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.degree + self.value_shape

    def components(self, X) -> Jet:
        return self.field(X)

    def jet(self, x, order: int = 0) -> Jet:
        if order + self.depth > MAX_ORDER:
            raise UnsupportedOrder(f"form of depth {self.depth} cannot be evaluated at order {order}")
        X = Coords(x, order + self.depth)
        return self.field(X).truncate(order)

    def at(self, x) -> np.ndarray:
        """Dense antisymmetric components at the point ``x``."""
        return self.jet(x, 0).value

    def __call__(self, x, *vectors) -> np.ndarray:
        return evaluate(self, x, vectors)

    # algebra
    def _like(self, fn, depth, value_shape=None, algebra=None, name="", is_zero=False):
        vs = self.value_shape if value_shape is None else tuple(value_shape)
        return LocalForm(self.degree, self.n, vs, FieldHandle(fn, self.n, depth), algebra, is_zero, name)

    def __add__(self, other: "LocalForm") -> "LocalForm":
        _check_same(self, other)
        if other.is_zero:
            return self
        if self.is_zero:
            return other
        a, b = self, other
        return self._like(lambda X: a.field(X) + b.field(X), max(a.depth, b.depth), algebra=a.algebra or b.algebra)

    def __neg__(self) -> "LocalForm":
        a = self
        return self._like(lambda X: -a.field(X), a.depth, algebra=a.algebra, is_zero=a.is_zero)

    def __sub__(self, other: "LocalForm") -> "LocalForm":
        return self + (-other)

    def __mul__(self, c) -> "LocalForm":
        """Multiplication by a constant scalar."""
        if isinstance(c, LocalForm):
            raise TypeError("use wedge() for products of forms")
        a = self
        return self._like(lambda X: a.field(X) * c, a.depth, algebra=a.algebra, is_zero=a.is_zero)

    __rmul__ = __mul__

    def map_values(self, fn: Callable[[Jet], Jet], value_shape=None, algebra=None, name="") -> "LocalForm":
        """Apply a pointwise map acting on the value axes (jet in, jet out).

        ``fn`` receives the component jet with the form axes leading.
        """
        a = self
        return self._like(lambda X: fn(a.field(X)), a.depth, value_shape=value_shape, algebra=algebra, name=name)

    def block(self, rows, cols) -> "LocalForm":
        """Sub-block of a matrix-valued form."""
        k = self.degree
        key = (slice(None),) * k + (rows, cols)
        probe = np.zeros(self.value_shape)[(rows, cols)]
        return self.map_values(lambda j: j[key], value_shape=probe.shape)

    def __repr__(self):
        return f"LocalForm(degree={self.degree}, n={self.n}, value_shape={self.value_shape}, depth={self.depth})"


def _check_same(a: LocalForm, b: LocalForm) -> None:
    if a.degree != b.degree or a.n != b.n:
        raise ShapeMismatch(f"cannot add forms of degree {a.degree}/{b.degree} on {a.n}/{b.n}-dim charts")
    if a.value_shape != b.value_shape:
        raise ShapeMismatch(f"value shapes differ: {a.value_shape} vs {b.value_shape}")


def form(degree: int, n: int, value_shape, fn, depth: int = 0, algebra=None, name: str = "") -> LocalForm:
    """Wrap a dense antisymmetric component function as a form."""
    return LocalForm(degree, n, tuple(value_shape), FieldHandle(fn, n, depth), algebra, False, name)


def zero_form(degree: int, n: int, value_shape=(), dtype=float, algebra=None) -> LocalForm:
    shape = (n,) * degree + tuple(value_shape)
    z = np.zeros(shape, dtype=dtype)
    return LocalForm(degree, n, tuple(value_shape), FieldHandle(lambda X: X.const(z), n, 0), algebra, True, "0")


def constant_form(degree: int, n: int, components: np.ndarray, algebra=None) -> LocalForm:
    comps = np.asarray(components)
    value_shape = comps.shape[degree:]
    return form(degree, n, value_shape, lambda X: X.const(comps), 0, algebra)


def scalar_field(fn, n: int, value_shape=(), depth: int = 0, algebra=None) -> LocalForm:
    """A 0-form from ``fn(X) -> Jet``."""
    return form(0, n, value_shape, fn, depth, algebra)


def form_from_coefficients(degree: int, n: int, coeffs: dict, value_shape=(), algebra=None) -> LocalForm:
    """Build a form from strictly increasing index tuples → ``fn(X)``.

    ``{(0, 1): f}`` means ``f dx⁰∧dx¹``.
    """
    value_shape = tuple(value_shape)
    items = []
    for idx, fn in coeffs.items():
        idx = tuple(idx)
        if len(idx) != degree or list(idx) != sorted(set(idx)):
            raise ShapeMismatch(f"index {idx} is not strictly increasing of length {degree}")
        items.append((idx, fn))
    depth = max((getattr(fn, "depth", 0) for _, fn in items), default=0)

    def comps(X):
        out = X.const(np.zeros((n,) * degree + value_shape))
        for idx, fn in items:
            c = fn(X)
            if not isinstance(c, Jet):
                c = X.const(np.asarray(c, dtype=float))
            c = c.broadcast_to(value_shape) if c.shape != value_shape else c
            for p, sgn in _perms(degree):
                key = tuple(idx[i] for i in p)
                mask = np.zeros((n,) * degree)
                mask[key] = sgn
                out = out + bilinear(mask.reshape(mask.shape + (1,) * len(value_shape)), c, np.multiply)
        return out

    return form(degree, n, value_shape, comps, depth, algebra)


# -- operations ---------------------------------------------------------------
def exterior_derivative(a: LocalForm) -> LocalForm:
    """(da)_{μ0…μk} = (k+1) ∂_{[μ0} a_{μ1…μk]}."""
    k, n = a.degree, a.n
    if a.is_zero or k >= n:
        return zero_form(k + 1, n, a.value_shape, algebra=a.algebra)

    def comps(X):
        return antisymmetrize(grad(a.field(X)), k + 1) * float(k + 1)

    return form(k + 1, n, a.value_shape, comps, a.depth + 1, a.algebra, name=f"d{a.name}")


def _outer(op, p: int, q: int, va: tuple, vb: tuple, n: int):
    """Tensor product of form axes with ``op`` applied on the value axes."""
    la, lb = p + len(va), q + len(vb)

    def f(x, y):
        lead_x, lead_y = x.shape[: x.ndim - la], y.shape[: y.ndim - lb]
        out = op(x.reshape(lead_x + (n**p, 1) + va), y.reshape(lead_y + (1, n**q) + vb))
        r = len(lead_x)
        return out.reshape(out.shape[:r] + (n,) * (p + q) + out.shape[r + 2 :])

    return f


def wedge(a: LocalForm, b: LocalForm, op=MATMUL, algebra=None) -> LocalForm:
    """Wedge product with a bilinear value operation ``op`` (default matmul).

    c_{μ1…μ(p+q)} = ((p+q)!/(p! q!)) Alt(a ⊗ b).
    """
    if a.n != b.n:
        raise ShapeMismatch("forms live on charts of different dimension")
    p, q, n = a.degree, b.degree, a.n
    if p + q > n:
        raise DegreeOverflow(f"wedge of degrees {p} and {q} exceeds chart dimension {n}")
    vout = _out_shape(op, a.value_shape, b.value_shape)
    if a.is_zero or b.is_zero:
        return zero_form(p + q, n, vout, algebra=algebra)
    f = _outer(op, p, q, a.value_shape, b.value_shape, n)
    coef = math.comb(p + q, p)

    def comps(X):
        c = bilinear(a.field(X), b.field(X), f, pad=False)
        return antisymmetrize(c, p + q) * float(coef) if p and q else c

    return form(p + q, n, vout, comps, max(a.depth, b.depth), algebra)


def wedge_bracket(a: LocalForm, b: LocalForm) -> LocalForm:
    """Graded commutator [a, b] = a∧b − (−1)^{pq} b∧a of matrix-valued forms."""
    if a.algebra is not None and b.algebra is not None and a.algebra is not b.algebra:
        from .errors import TwistGaugeError

        raise TwistGaugeError(f"group mismatch: {a.algebra.name} vs {b.algebra.name}")
    alg = a.algebra or b.algebra
    sign = -1.0 if (a.degree * b.degree) % 2 else 1.0
    ab = wedge(a, b, MATMUL, alg)
    if ab.is_zero:
        return ab
    return ab - wedge(b, a, MATMUL, alg) * sign


@dataclass(frozen=True, eq=False)
class MetricField:
    """Jet-evaluable symmetric metric g_{μν}(x)."""

    field: FieldHandle
    n: int
    signature: tuple = (1, -1, -1, -1)
    orientation: int = 1

    @property
    def depth(self) -> int:
        return self.field.depth

    def __call__(self, X) -> Jet:
        return self.field(X)

    def at(self, x) -> np.ndarray:
        return self.field.at(x)

    @classmethod
    def from_fn(cls, fn, n: int = 4, signature=(1, -1, -1, -1), depth: int = 0) -> "MetricField":
        return cls(FieldHandle(fn, n, depth), n, tuple(signature))

    @classmethod
    def minkowski(cls, n: int = 4) -> "MetricField":
        eta = np.diag([1.0] + [-1.0] * (n - 1))
        return cls(FieldHandle(lambda X: X.const(eta), n, 0), n, tuple(np.diag(eta).astype(int)))

    def check(self, x, tol: float = 1e-10) -> None:
        g = self.at(x)
        if np.max(np.abs(g - g.T)) > 1e-10 * max(1.0, np.max(np.abs(g))):
            raise DegenerateMetric(f"metric is not symmetric at {np.asarray(x).tolist()}")
        if abs(np.linalg.det(g)) <= tol:
            raise DegenerateMetric(f"metric is degenerate at {np.asarray(x).tolist()}")


def hodge_star(a: LocalForm, g: MetricField) -> LocalForm:
    """(∗a)_{ν…} = (1/k!) √|g| a^{μ1…μk} ε_{μ1…μk ν…}."""
    k, n = a.degree, a.n
    if g.n != n:
        raise ShapeMismatch("metric and form live on different charts")
    if k > n:
        raise DegreeOverflow("form degree exceeds chart dimension")
    eps = levi_civita(n) * g.orientation
    vs = a.value_shape
    nv = len(vs)

    def comps(X):
        gj = g(X)
        if abs(np.linalg.det(gj.value)) <= 1e-10:
            raise DegenerateMetric(f"singular metric at {X.point.tolist()}")
        ginv = jinv(gj)
        det = jdet(gj)
        vol = jsqrt(det if det.value > 0 else -det)
        c = a.field(X)
        for i in range(k):
            # raise axis i: c^{..μ..} = g^{μν} c_{..ν..}
            def raise_axis(gi, ci, i=i):
                ax = ci.ndim - k - nv + i
                moved = np.moveaxis(ci, ax, -1)
                out = np.einsum("...mn,...n->...m", _bcast(gi, moved.ndim), moved)
                return np.moveaxis(out, -1, ax)

            c = bilinear(ginv, c, raise_axis, pad=False)
        # contract first k axes with ε (linear, constant)

        def contract(arr):
            lead = arr.ndim - k - nv
            out = np.tensordot(arr, eps, axes=(list(range(lead, lead + k)), list(range(k))))
            # tensordot puts value axes before the remaining ε axes; move them back
            order = list(range(lead)) + list(range(lead + nv, lead + nv + n - k)) + list(range(lead, lead + nv))
            return np.transpose(out, order) / math.factorial(k)

        star = c.map_linear(contract)
        return bilinear(vol, star, lambda v, s: v.reshape(v.shape + (1,) * (n - k + nv)) * s, pad=False)

    return form(n - k, n, vs, comps, max(a.depth, g.depth), a.algebra, name=f"*{a.name}")


def _bcast(gi, ndim):
    """Return ``gi`` (lead..., n, n) broadcastable against a (lead..., rest..., n) array."""
    lead = gi.ndim - 2
    return gi.reshape(gi.shape[:lead] + (1,) * (ndim - 1 - lead) + gi.shape[lead:])


def evaluate(a: LocalForm, x, vectors: Sequence) -> np.ndarray:
    """a_x(v1, …, vk); exactly zero whenever two vectors coincide."""
    vectors = [np.asarray(v, dtype=float) for v in vectors]
    if len(vectors) != a.degree:
        raise ShapeMismatch(f"degree-{a.degree} form needs {a.degree} vectors, got {len(vectors)}")
    for i, j in itertools.combinations(range(len(vectors)), 2):
        if np.array_equal(vectors[i], vectors[j]):
            return np.zeros(a.value_shape)
    c = a.at(x)
    for v in vectors:
        c = np.tensordot(v, c, axes=([0], [0]))
    return c


def _compose_jet(outer: Jet, inner: Sequence[Jet], y0: np.ndarray) -> Jet:
    """Taylor composition F(y(x)) from the jet of F at y0 and the jets y(x).

    Exact to the stored order because y(x) − y0 has no constant term.
    """
    order = min(outer.order, min(j.order for j in inner))
    dy = stack([j - float(v) for j, v in zip(inner, y0)]).truncate(order)
    nv = outer.ndim
    out = Jet.constant(outer.parts[0], dy.n_vars, order)
    for r in range(1, order + 1):
        acc = Jet.constant(outer.parts[r], dy.n_vars, order)
        for _ in range(r):
            acc = bilinear(dy, acc, lambda d, c: _contract_first(d, c, nv), pad=False)
        out = out + acc * (1.0 / math.factorial(r))
    return out


def _contract_first(d, c, nv):
    """Contract the vector axis of ``d`` with the first index axis of ``c``.

    ``d`` has shape lead + (n,); ``c`` has shape lead + (n,)*m + V, len(V) = nv.
    """
    lead = d.ndim - 1
    m = c.ndim - lead - nv
    dd = d.reshape(d.shape[:lead] + (d.shape[-1],) + (1,) * (m - 1 + nv))
    return (dd * c).sum(axis=lead)


def _bcast_mat(J, ndim):
    """Make J (lead + (m, n)) broadcast against an array of ``ndim`` axes ending in n."""
    lead = J.ndim - 2
    return J.reshape(J.shape[:lead] + (1,) * (ndim - 1 - lead) + J.shape[lead:])


def pullback(a: LocalForm, phi: FieldHandle | Callable, m: int | None = None) -> LocalForm:
    """Pull ``a`` back along a chart map ``phi`` (source dim ``m`` → ``a.n``).

    ``phi(X)`` returns a jet of shape ``(a.n,)``.
    """
    if not isinstance(phi, FieldHandle):
        if m is None:
            raise ShapeMismatch("source dimension m required for a bare callable chart map")
        phi = FieldHandle(phi, m, 0)
    m = phi.n_vars
    k, n = a.degree, a.n
    depth = max(a.depth, phi.depth + (1 if k else 0))

    def comps(X):
        y = phi(X)
        if y.shape != (n,):
            raise ShapeMismatch(f"chart map returns shape {y.shape}, expected {(n,)}")
        Y = Coords(y.value, X.order - depth + a.depth)
        out = _compose_jet(a.field(Y), [y[i] for i in range(n)], y.value)
        if k == 0:
            return out
        J = grad(y)  # J[μ, i] = ∂_μ y^i
        for j in range(k):
            def contract(Jp, Fp, j=j):
                ax = Jp.ndim - 2 + j
                moved = np.moveaxis(Fp, ax, -1)
                res = np.einsum("...mi,...i->...m", _bcast_mat(Jp, moved.ndim), moved)
                return np.moveaxis(res, -1, ax)

            out = bilinear(J, out, contract, pad=False)
        return out

    return form(k, m, a.value_shape, comps, depth, a.algebra, name=f"pullback({a.name})")
