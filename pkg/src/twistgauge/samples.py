"""Seeded random polynomial data for verification suites.

Everything here is deterministic given a ``numpy.random.Generator``; the
verification suites, tests and scripts all draw their data from these.
"""
from __future__ import annotations

import numpy as np

from .cocycle import exp_field, random_algebra_field
from .forms import LocalForm, form
from .jets import FieldHandle, Jet, jexp
from .lie import GroupSpec

__all__ = [
    "random_polynomial",
    "random_algebra_field",
    "random_group_field",
    "random_frame",
    "random_weyl_field",
    "random_cstar_field",
    "random_connection_form",
    "random_vector_form",
    "sample_points",
]


def _monomial(X, powers) -> Jet | None:
    term = None
    for mu, p in enumerate(powers):
        if p:
            t = X[mu] ** int(p)
            term = t if term is None else term * t
    return term


def random_polynomial(rng: np.random.Generator, n: int, shape=(), degree: int = 2, terms: int = 4,
                      scale: float = 0.3, dtype=float) -> FieldHandle:
    """Polynomial field with random coefficients of the given value shape."""
    shape = tuple(shape)

    def coeff():
        c = rng.normal(size=shape) * scale
        if np.dtype(dtype).kind == "c":
            c = c + 1j * rng.normal(size=shape) * scale
        return c

    const = coeff()
    monos = []
    for _ in range(terms):
        powers = rng.integers(0, degree + 1, size=n)
        while powers.sum() > degree:
            powers[rng.choice(np.flatnonzero(powers))] -= 1
        monos.append((tuple(int(p) for p in powers), coeff()))

    def fn(X):
        out = X.const(const)
        for powers, c in monos:
            m = _monomial(X, powers)
            out = out + (c if m is None else m * c)
        return out

    return FieldHandle(fn, n, 0, kind="complex" if np.dtype(dtype).kind == "c" else "real", name="poly")


def random_group_field(group: GroupSpec, rng: np.random.Generator, n: int, degree: int = 2, scale: float = 0.3,
                       terms: int = 3) -> FieldHandle:
    """exp of a random algebra-valued polynomial."""
    return exp_field(random_algebra_field(group, rng, n, degree, scale, terms))


def random_weyl_field(rng: np.random.Generator, n: int, scale: float = 0.3, degree: int = 2) -> FieldHandle:
    """Positive scalar z(x) = exp(p(x)) as a 1×1 matrix field."""
    p = random_polynomial(rng, n, (), degree, 4, scale)
    return FieldHandle(lambda X: jexp(p(X)).reshape(1, 1), n, 0, name="z")


def random_cstar_field(rng: np.random.Generator, n: int, scale: float = 0.3, degree: int = 2) -> FieldHandle:
    """Nonzero complex scalar exp(p(x)) with complex polynomial p, as a 1×1 field."""
    p = random_polynomial(rng, n, (), degree, 4, scale, complex)
    return FieldHandle(lambda X: jexp(p(X)).reshape(1, 1), n, 0, kind="complex", name="u")


def random_frame(rng: np.random.Generator, n: int = 4, scale: float = 0.1, degree: int = 2) -> FieldHandle:
    """Vielbein e[a, μ] = δ + small polynomial, well conditioned on the unit box."""
    p = random_polynomial(rng, n, (n, n), degree, 4, scale)
    eye = np.eye(n)
    return FieldHandle(lambda X: p(X) + eye, n, 0, name="e")


def random_connection_form(group: GroupSpec, rng: np.random.Generator, n: int, degree: int = 2,
                           scale: float = 0.3) -> LocalForm:
    """1-form A = A_μ dx^μ with each A_μ a random algebra-valued polynomial."""
    comps = [random_algebra_field(group, rng, n, degree, scale) for _ in range(n)]
    from .jets import stack

    return form(1, n, (group.dim, group.dim), lambda X: stack([c(X) for c in comps]), 0, algebra=group, name="A")


def random_vector_form(rng: np.random.Generator, n: int, dim: int, k: int = 0, degree: int = 2,
                       scale: float = 0.5, dtype=float) -> LocalForm:
    """Random degree-``k`` form valued in a ``dim``-vector space (k ≤ 1)."""
    if k == 0:
        p = random_polynomial(rng, n, (dim,), degree, 4, scale, dtype)
        return form(0, n, (dim,), p, 0, name="φ")
    if k == 1:
        p = random_polynomial(rng, n, (n, dim), degree, 4, scale, dtype)
        return form(1, n, (dim,), p, 0, name="a")
    raise ValueError("only degrees 0 and 1 are generated")


def sample_points(rng: np.random.Generator, count: int, n: int, half_width: float = 0.5) -> np.ndarray:
    return rng.uniform(-half_width, half_width, size=(count, n))
