"""Truncated Taylor jets with exact partial derivatives up to order 3.

A :class:`Jet` carries an array-valued quantity together with all its mixed
partial derivatives with respect to ``n`` chart variables.  Storage is dense:
``parts[r]`` has shape ``(n,)*r + shape``, so derivative axes always lead and
numpy broadcasting over the trailing value axes (matmul, einsum with ``...``)
works unchanged.

Fields are plain callables ``fn(X) -> Jet`` where ``X`` is a :class:`Coords`
tuple of coordinate jets.  Wrapping them in :class:`FieldHandle` records the
number of derivatives the field itself consumes (its ``depth``) so evaluation
only seeds as many orders as are needed.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, ShapeMismatch, UnsupportedOrder

__all__ = [
    "MAX_ORDER",
    "Jet",
    "JetScalar",
    "Coords",
    "FieldHandle",
    "as_jet",
    "lift",
    "fd_oracle",
    "stack",
    "matrix",
    "einsum",
    "reciprocal",
    "bilinear",
    "jinv",
    "jexpm",
    "jdet",
    "grad",
    "jexp",
    "jlog",
    "jsqrt",
    "jpow",
    "jsin",
    "jcos",
]

MAX_ORDER = 3
INF_ORDER = 10**6


@lru_cache(maxsize=None)
def _canonical_index(n: int, r: int) -> np.ndarray:
    """Flat index of the sorted multi-index for every multi-index of length r."""
    idx = np.empty(n**r, dtype=np.intp)
    for flat, multi in enumerate(itertools.product(range(n), repeat=r)):
        s = sorted(multi)
        f = 0
        for i in s:
            f = f * n + i
        idx[flat] = f
    return idx


def _symmetrize(arr: np.ndarray, n: int, r: int) -> np.ndarray:
    """Copy the sorted-index entry into every permutation (bitwise Schwarz)."""
    if r < 2:
        return arr
    tail = arr.shape[r:]
    flat = arr.reshape((n**r,) + tail)
    return flat[_canonical_index(n, r)].reshape(arr.shape)


@lru_cache(maxsize=None)
def _subsets(r: int):
    """All (T, complement) splits of range(r), T as sorted tuple."""
    out = []
    for mask in range(1 << r):
        t = tuple(i for i in range(r) if mask >> i & 1)
        c = tuple(i for i in range(r) if not mask >> i & 1)
        out.append((t, c))
    return out


def _place(part: np.ndarray, k: int, r: int, positions: tuple) -> np.ndarray:
    """Expand a k-derivative part into r leading axes at ``positions``."""
    if k == r:
        return part
    missing = [i for i in range(r) if i not in positions]
    return np.expand_dims(part, tuple(missing))


class Jet:
    """Array-valued truncated Taylor jet.

    Parameters
    ----------
    parts:
        ``[value, d1, d2, d3]`` truncated to ``order + 1`` entries.
    n_vars:
        Chart dimension.
    """

    __slots__ = ("parts", "n_vars")
    __array_ufunc__ = None  # make ndarray defer to our reflected operators

    def __init__(self, parts: Sequence[np.ndarray], n_vars: int, symmetrize: bool = True):
        parts = [np.asarray(p) for p in parts]
        if len(parts) - 1 > MAX_ORDER:
            raise UnsupportedOrder(f"jet order {len(parts) - 1} exceeds {MAX_ORDER}")
        shape = parts[0].shape
        for r, p in enumerate(parts):
            if p.shape != (n_vars,) * r + shape:
                raise ShapeMismatch(f"part {r} has shape {p.shape}, expected {(n_vars,) * r + shape}")
        if symmetrize:
            parts = [_symmetrize(p, n_vars, r) for r, p in enumerate(parts)]
        self.parts = tuple(parts)
        self.n_vars = n_vars

    # -- construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, n_vars: int, order: int) -> "Jet":
        value = np.asarray(value)
        parts = [value] + [np.zeros((n_vars,) * r + value.shape, dtype=value.dtype) for r in range(1, order + 1)]
        return cls(parts, n_vars, symmetrize=False)

    @classmethod
    def variable(cls, x0: float, index: int, n_vars: int, order: int) -> "Jet":
        parts = [np.asarray(float(x0))]
        if order >= 1:
            d1 = np.zeros(n_vars)
            d1[index] = 1.0
            parts.append(d1)
        for r in range(2, order + 1):
            parts.append(np.zeros((n_vars,) * r))
        return cls(parts, n_vars, symmetrize=False)

    # -- basic properties -------------------------------------------------
    @property
    def order(self) -> int:
        return len(self.parts) - 1

    @property
    def value(self) -> np.ndarray:
        return self.parts[0]

    @property
    def shape(self) -> tuple:
        return self.parts[0].shape

    @property
    def ndim(self) -> int:
        return self.parts[0].ndim

    @property
    def dtype(self):
        return self.parts[0].dtype

    def partial(self, multi_index: Sequence[int]) -> np.ndarray:
        """Mixed partial ∂_{i1}…∂_{ik} as an array of the value shape."""
        k = len(multi_index)
        if k > self.order:
            raise UnsupportedOrder(f"partial of order {k} requested from order-{self.order} jet")
        return self.parts[k][tuple(multi_index)]

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise UnsupportedOrder(f"cannot raise jet order {self.order} to {order}")
        return Jet(self.parts[: order + 1], self.n_vars, symmetrize=False)

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, order={self.order}, n_vars={self.n_vars})"

    # -- linear maps ------------------------------------------------------
    def map_linear(self, fn: Callable[[np.ndarray], np.ndarray], value_ndim: int | None = None) -> "Jet":
        """Apply a linear map acting on the trailing value axes of every part.

        ``fn`` must broadcast over leading axes (e.g. ``np.swapaxes(p, -1, -2)``).
        """
        parts = [fn(p) for p in self.parts]
        return Jet(parts, self.n_vars, symmetrize=False)

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        return Jet([p[(slice(None),) * r + key] for r, p in enumerate(self.parts)], self.n_vars, symmetrize=False)

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        n = self.n_vars
        return Jet([p.reshape((n,) * r + tuple(shape)) for r, p in enumerate(self.parts)], n, symmetrize=False)

    def swapaxes(self, a: int, b: int) -> "Jet":
        a = a if a < 0 else a - self.ndim
        b = b if b < 0 else b - self.ndim
        return self.map_linear(lambda p: np.swapaxes(p, a, b))

    @property
    def T(self) -> "Jet":
        return self.swapaxes(-1, -2)

    def conj(self) -> "Jet":
        return self.map_linear(np.conj)

    @property
    def real(self) -> "Jet":
        return self.map_linear(np.real)

    @property
    def imag(self) -> "Jet":
        return self.map_linear(np.imag)

    def trace(self) -> "Jet":
        return self.map_linear(lambda p: np.trace(p, axis1=-2, axis2=-1))

    def sum(self, axis: int) -> "Jet":
        ax = axis if axis < 0 else axis - self.ndim
        return self.map_linear(lambda p: p.sum(axis=ax))

    def broadcast_to(self, shape) -> "Jet":
        n = self.n_vars
        return Jet([np.broadcast_to(p, (n,) * r + tuple(shape)) for r, p in enumerate(self.parts)], n, symmetrize=False)

    # -- arithmetic -------------------------------------------------------
    def _pad(self, ndim: int) -> "Jet":
        extra = ndim - self.ndim
        if extra <= 0:
            return self
        n = self.n_vars
        return Jet([p.reshape((n,) * r + (1,) * extra + self.shape) for r, p in enumerate(self.parts)], n, symmetrize=False)

    def __neg__(self) -> "Jet":
        return Jet([-p for p in self.parts], self.n_vars, symmetrize=False)

    def __pos__(self) -> "Jet":
        return self

    def __add__(self, other) -> "Jet":
        if isinstance(other, Jet):
            _check_vars(self, other)
            order = min(self.order, other.order)
            nd = max(self.ndim, other.ndim)
            a, b = self._pad(nd), other._pad(nd)
            return Jet([a.parts[r] + b.parts[r] for r in range(order + 1)], self.n_vars, symmetrize=False)
        other = np.asarray(other)
        a = self._pad(other.ndim)
        parts = list(a.parts)
        parts[0] = parts[0] + other
        shape = parts[0].shape
        n = self.n_vars
        parts[1:] = [np.broadcast_to(p, (n,) * r + shape) if p.shape[r:] != shape else p
                     for r, p in enumerate(parts[1:], start=1)]
        return Jet(parts, n, symmetrize=False)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        return self + (-other)

    def __rsub__(self, other) -> "Jet":
        return (-self) + other

    def __mul__(self, other) -> "Jet":
        return bilinear(self, other, np.multiply)

    def __rmul__(self, other) -> "Jet":
        return bilinear(other, self, np.multiply)

    def __matmul__(self, other) -> "Jet":
        return bilinear(self, other, np.matmul)

    def __rmatmul__(self, other) -> "Jet":
        return bilinear(other, self, np.matmul)

    def __truediv__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return self * reciprocal(other)
        return self * (1.0 / np.asarray(other))

    def __rtruediv__(self, other) -> "Jet":
        return np.asarray(other) * reciprocal(self)

    def __pow__(self, p) -> "Jet":
        if isinstance(p, (int, np.integer)) and p >= 0:
            out = None
            base = self
            e = int(p)
            while e:
                if e & 1:
                    out = base if out is None else out * base
                e >>= 1
                if e:
                    base = base * base
            return out if out is not None else Jet.constant(np.ones(self.shape), self.n_vars, self.order)
        return jpow(self, float(p))


JetScalar = Jet


def _check_vars(a: Jet, b: Jet) -> None:
    if a.n_vars != b.n_vars:
        raise ShapeMismatch(f"jets over {a.n_vars} and {b.n_vars} variables cannot be combined")


def bilinear(a, b, op: Callable[[np.ndarray, np.ndarray], np.ndarray], pad: bool = True) -> Jet:
    """Apply a broadcasting bilinear ``op`` with the general Leibniz rule.

    Either operand may be a plain array (treated as a constant).  With
    ``pad=True`` the value shapes are left-padded to equal rank first, which
    is what elementwise ops and matmul want; custom ops that locate their
    axes from the operand's own value rank should pass ``pad=False``.  In
    both cases every part handed to ``op`` carries the same number of leading
    derivative axes (possibly of size 1).
    """
    a_jet, b_jet = isinstance(a, Jet), isinstance(b, Jet)
    if not a_jet and not b_jet:
        raise TypeError("bilinear needs at least one Jet operand")
    if not b_jet:
        b = np.asarray(b)
        if pad:
            a = a._pad(b.ndim)
        return Jet([op(p, b) for p in a.parts], a.n_vars, symmetrize=False)
    if not a_jet:
        a = np.asarray(a)
        if pad:
            b = b._pad(a.ndim)
        return Jet([op(a, p) for p in b.parts], b.n_vars, symmetrize=False)
    _check_vars(a, b)
    if pad:
        nd = max(a.ndim, b.ndim)
        a, b = a._pad(nd), b._pad(nd)
    order = min(a.order, b.order)
    parts = []
    for r in range(order + 1):
        acc = None
        for t, c in _subsets(r):
            term = op(_place(a.parts[len(t)], len(t), r, t), _place(b.parts[len(c)], len(c), r, c))
            acc = term if acc is None else acc + term
        parts.append(acc)
    return Jet(parts, a.n_vars)


def einsum(spec: str, a, b) -> Jet:
    """Bilinear einsum on jets.

    ``spec`` spells out every value axis and uses ``...`` for the leading
    derivative axes, e.g. ``"...m,...ma->...a"``.  Constant operands carry no
    leading axes and should be written without ``...``.
    """
    return bilinear(a, b, lambda x, y: np.einsum(spec, x, y), pad=False)


def _compose(u: Jet, derivs: Sequence[np.ndarray]) -> Jet:
    """Faà di Bruno for an elementwise function with derivatives phi', phi'', phi'''."""
    n = u.n_vars
    parts = [derivs[0]]
    if u.order >= 1:
        u1 = u.parts[1]
        parts.append(derivs[1] * u1)
    if u.order >= 2:
        u2 = u.parts[2]
        outer = u1[:, None] * u1[None, :]
        parts.append(derivs[2] * outer + derivs[1] * u2)
    if u.order >= 3:
        u3 = u.parts[3]
        triple = u1[:, None, None] * u1[None, :, None] * u1[None, None, :]
        mixed = u2[:, :, None] * u1[None, None, :] + u2[:, None, :] * u1[None, :, None] + u2[None, :, :] * u1[:, None, None]
        parts.append(derivs[3] * triple + derivs[2] * mixed + derivs[1] * u3)
    return Jet(parts, n)


def jexp(u: Jet) -> Jet:
    e = np.exp(u.value)
    return _compose(u, [e] * 4)


def jlog(u: Jet) -> Jet:
    v = u.value
    if not np.iscomplexobj(v) and np.any(v <= 0):
        raise DomainError("log of nonpositive real jet value")
    if np.any(v == 0):
        raise DomainError("log of zero")
    return _compose(u, [np.log(v), 1.0 / v, -1.0 / v**2, 2.0 / v**3])


def jpow(u: Jet, p: float) -> Jet:
    v = u.value
    if not np.iscomplexobj(v) and np.any(v <= 0) and float(p) != int(p):
        raise DomainError("non-integer power of nonpositive real jet value")
    return _compose(u, [v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2), p * (p - 1) * (p - 2) * v ** (p - 3)])


def reciprocal(u: Jet) -> Jet:
    v = u.value
    if np.any(v == 0):
        raise DomainError("reciprocal of zero")
    r = 1.0 / v
    return _compose(u, [r, -(r**2), 2 * r**3, -6 * r**4])


def jsqrt(u: Jet) -> Jet:
    return jpow(u, 0.5)


def jsin(u: Jet) -> Jet:
    s, c = np.sin(u.value), np.cos(u.value)
    return _compose(u, [s, c, -s, -c])


def jcos(u: Jet) -> Jet:
    s, c = np.sin(u.value), np.cos(u.value)
    return _compose(u, [c, -s, -c, s])


def grad(u: Jet) -> Jet:
    """Jet of the gradient: a new leading value axis of length n, one order less.

    The result has shape ``(n,) + u.shape`` with the derivative index first.
    """
    if u.order < 1:
        raise UnsupportedOrder("gradient of an order-0 jet")
    return Jet(u.parts[1:], u.n_vars, symmetrize=False)


def stack(items: Sequence, axis: int = 0) -> Jet:
    """Stack jets (or constants) along a new value axis."""
    jets = [x for x in items if isinstance(x, Jet)]
    if not jets:
        raise TypeError("stack needs at least one Jet")
    n = jets[0].n_vars
    order = min(j.order for j in jets)
    shape = np.broadcast_shapes(*[np.shape(x.value if isinstance(x, Jet) else x) for x in items])
    cplx = any(np.iscomplexobj(x.value if isinstance(x, Jet) else x) for x in items)
    dtype = complex if cplx else float
    conv = []
    for x in items:
        if not isinstance(x, Jet):
            x = Jet.constant(np.asarray(x, dtype=dtype), n, order)
        x = x.truncate(order) if x.order > order else x
        conv.append(x.broadcast_to(shape))
    ax = axis if axis >= 0 else axis + len(shape) + 1
    parts = [np.stack([c.parts[r] for c in conv], axis=r + ax) for r in range(order + 1)]
    return Jet(parts, n, symmetrize=False)


def matrix(rows: Sequence[Sequence]) -> Jet:
    """Assemble a 2-D jet matrix from nested rows of jets/constants."""
    jets = [x for row in rows for x in row if isinstance(x, Jet)]
    n, order = jets[0].n_vars, min(j.order for j in jets)
    built = []
    for row in rows:
        if any(isinstance(x, Jet) for x in row):
            built.append(stack(list(row), axis=-1))
        else:
            built.append(Jet.constant(np.asarray(row), n, order))
    return stack(built, axis=-2)


def jinv(m: Jet) -> Jet:
    """Inverse of a (batched) square jet matrix, solved order by order."""
    try:
        k0 = np.linalg.inv(m.value)
    except np.linalg.LinAlgError as exc:
        from .errors import NonInvertible

        raise NonInvertible("singular matrix value") from exc
    n = m.n_vars
    parts = [k0]
    for r in range(1, m.order + 1):
        acc = None
        for t, c in _subsets(r):
            if not t:
                continue
            term = np.matmul(_place(m.parts[len(t)], len(t), r, t), _place(parts[len(c)], len(c), r, c))
            acc = term if acc is None else acc + term
        kr = -np.matmul(k0, acc)
        parts.append(_symmetrize(kr, n, r))
    return Jet(parts, n, symmetrize=False)


def jexpm(m: Jet, terms: int = 20) -> Jet:
    """Matrix exponential of a jet matrix by scaling and squaring a Taylor series."""
    norm = np.max(np.abs(m.value).sum(axis=-1)) if m.value.size else 0.0
    s = max(0, int(math.ceil(math.log2(norm / 0.25)))) if norm > 0.25 else 0
    a = m * (1.0 / 2**s)
    eye = np.broadcast_to(np.eye(m.shape[-1], dtype=m.dtype), m.shape)
    out = Jet.constant(eye, m.n_vars, m.order) + a
    term = a
    for k in range(2, terms):
        term = (term @ a) * (1.0 / k)
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def jdet(m: Jet) -> Jet:
    """Determinant of a square jet matrix by permutation expansion (small sizes)."""
    d = m.shape[-1]
    out = None
    for perm in itertools.permutations(range(d)):
        inv = sum(1 for i in range(d) for j in range(i + 1, d) if perm[i] > perm[j])
        term = m[..., 0, perm[0]]
        for i in range(1, d):
            term = term * m[..., i, perm[i]]
        term = term if inv % 2 == 0 else -term
        out = term if out is None else out + term
    return out


def as_jet(obj, n_vars: int, order: int) -> Jet:
    if isinstance(obj, Jet):
        return obj
    return Jet.constant(np.asarray(obj), n_vars, order)


class Coords(tuple):
    """Coordinate jets at one point, with a per-evaluation memo table.

    The memo lives on the evaluation context, never on the field, so fields
    stay immutable and can be evaluated concurrently.
    """

    def __new__(cls, point, order: int):
        point = np.asarray(point, dtype=float).ravel()
        n = point.size
        if order > MAX_ORDER:
            raise UnsupportedOrder(f"requested order {order} exceeds {MAX_ORDER}")
        self = super().__new__(cls, [Jet.variable(point[i], i, n, order) for i in range(n)])
        self.point = point
        self.order = order
        self.n_vars = n
        self.memo = {}
        return self

    def const(self, value) -> Jet:
        return Jet.constant(np.asarray(value), self.n_vars, self.order)


@dataclass(frozen=True, eq=False)
class FieldHandle:
    """A jet-evaluable field on an ``n_vars``-dimensional chart.

    ``fn`` receives :class:`Coords` and returns a :class:`Jet` (or a constant
    array).  ``depth`` is the number of derivatives ``fn`` takes internally;
    an order-``k`` request seeds ``k + depth`` orders.
    """

    fn: Callable
    n_vars: int
    depth: int = 0
    kind: str = "real"
    name: str = dc_field(default="field")

    def __call__(self, X: Coords) -> Jet:
        memo = getattr(X, "memo", None)
        if memo is not None and self in memo:
            return memo[self]
        out = as_jet(self.fn(X), len(X), X.order)
        if memo is not None:
            memo[self] = out
        return out

    def lift(self, x, order: int = 0) -> Jet:
        return lift(self, x, order)

    def at(self, x) -> np.ndarray:
        return lift(self, x, 0).value


def lift(field, x, order: int = 0) -> Jet:
    """Value and mixed partials of ``field`` at ``x`` up to ``order``."""
    if order < 0 or order > MAX_ORDER:
        raise UnsupportedOrder(f"order must be in 0..{MAX_ORDER}, got {order}")
    depth = getattr(field, "depth", 0)
    if order + depth > MAX_ORDER:
        raise UnsupportedOrder(f"field of depth {depth} cannot be lifted to order {order}")
    X = Coords(x, order + depth)
    try:
        out = as_jet(field(X), len(X), X.order)
    except FloatingPointError as exc:
        raise DomainError(str(exc)) from exc
    return out.truncate(order)


def fd_oracle(field, x, multi_index: Sequence[int], step: float | None = None) -> np.ndarray:
    """Central finite-difference estimate of a mixed partial at ``x``.

    Only the order-0 value of ``field`` is used, so this is independent from
    the jet propagation rules.
    """
    k = len(multi_index)
    if k > MAX_ORDER:
        raise UnsupportedOrder("finite differences beyond order 3 are not provided")
    if step is None:
        step = 1e-4 if k <= 2 else 1e-3
    x = np.asarray(x, dtype=float)
    if step <= 0 or np.any(x + step == x):
        raise DomainError("degenerate finite-difference step")

    def value(pt):
        return lift(field, pt, 0).value

    if k == 0:
        return value(x)
    n = x.size
    total = None
    for signs in itertools.product((1, -1), repeat=k):
        shift = np.zeros(n)
        for s, i in zip(signs, multi_index):
            shift[i] += s * step
        v = value(x + shift) * float(np.prod(signs))
        total = v if total is None else total + v
    return total / (2 * step) ** k
