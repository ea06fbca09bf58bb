"""Matrix Lie groups, their algebras, and the catalog of concrete groups.

Everything works on plain numpy matrices; :class:`AlgElem` and
:class:`GrpElem` are thin validated wrappers tying a matrix to its
:class:`GroupSpec`.

Conventions
-----------
* Minkowski metric ``ETA = diag(1, -1, -1, -1)``.
* Spin map ``x̄ = x^a σ_a`` with ``σ_a = ½·(1, Pauli_1, Pauli_2, Pauli_3)``,
  so ``4 det x̄ = xᵀ η x`` and ``x^a = 2 Tr(x̄ σ_a)``.
* Tractor metric ``H_TRACTOR`` has ``-1`` in the two corner entries and
  ``η`` in the middle block; the tractor algebra ``so(2,4)`` preserves it.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .errors import GroupMismatch, LogDomainError, NotInGroup, ShapeMismatch, StructureConstantError, TwistGaugeError

__all__ = [
    "ETA",
    "SIGMA",
    "H_TRACTOR",
    "H_TWISTOR",
    "GroupSpec",
    "AlgElem",
    "GrpElem",
    "SemidirectSpec",
    "exp_alg",
    "log_grp",
    "bracket",
    "adjoint",
    "killing",
    "semidirect_compose",
    "spin_iso",
    "spin_iso_dual",
    "spin_iso_inverse",
    "covector_bar",
    "double_cover",
    "spin_alg_to_so",
    "so_to_spin_alg",
    "tractor_to_twistor_alg",
    "so13",
    "sl2c",
    "weyl_dilations",
    "tractor_G",
    "tractor_G_SO",
    "tractor_full",
    "twistor_G",
    "twistor_G_SL",
    "twistor_full",
    "cstar",
    "su2",
    "poincare",
    "tractor_element",
    "twistor_element",
    "lorentz_embed",
    "spin_embed",
]

ETA = np.diag([1.0, -1.0, -1.0, -1.0])

_PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
SIGMA = 0.5 * _PAULI

H_TRACTOR = np.zeros((6, 6))
H_TRACTOR[0, 5] = H_TRACTOR[5, 0] = -1.0
H_TRACTOR[1:5, 1:5] = ETA

H_TWISTOR = np.zeros((4, 4), dtype=complex)
H_TWISTOR[:2, 2:] = np.eye(2)
H_TWISTOR[2:, :2] = np.eye(2)

ALG_TOL = 1e-10
MEMBER_TOL = 1e-9


# --------------------------------------------------------------------------
# GroupSpec


def _realify(mats: np.ndarray) -> np.ndarray:
    """Flatten (m, d, d) matrices to real column vectors (re, im)."""
    m = mats.reshape(mats.shape[0], -1)
    return np.concatenate([m.real, m.imag], axis=1).T


@dataclass(frozen=True, eq=False)
class GroupSpec:
    """A matrix Lie group described by a real basis of its algebra.

    ``member(M, tol)`` is the defining predicate of the group.  ``grading``
    optionally assigns an integer level to every basis element.
    """

    name: str
    dim: int
    kind: str
    basis: np.ndarray
    member: Callable[[np.ndarray, float], bool]
    grading: tuple | None = None
    real_group: bool = True

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=complex if self.kind == "complex" else float)
        if basis.ndim != 3 or basis.shape[1:] != (self.dim, self.dim):
            raise ShapeMismatch(f"{self.name}: basis must have shape (m, {self.dim}, {self.dim})")
        object.__setattr__(self, "basis", basis)
        if self.grading is not None and len(self.grading) != len(basis):
            raise ShapeMismatch(f"{self.name}: grading length mismatch")
        _ = self.structure_constants  # validate closure eagerly

    @property
    def alg_dim(self) -> int:
        return self.basis.shape[0]

    @cached_property
    def _projector(self):
        b = _realify(self.basis)
        pinv = np.linalg.pinv(b)
        if np.linalg.matrix_rank(b, tol=1e-10) != b.shape[1]:
            raise StructureConstantError(f"{self.name}: basis is linearly dependent")
        return b, pinv

    def coords(self, X: np.ndarray) -> np.ndarray:
        """Real coefficients of ``X`` (shape (..., d, d)) in the basis."""
        b, pinv = self._projector
        X = np.asarray(X)
        flat = X.reshape(X.shape[:-2] + (-1,))
        v = np.concatenate([flat.real, flat.imag], axis=-1)
        return v @ pinv.T

    def from_coords(self, c: np.ndarray) -> np.ndarray:
        return np.tensordot(np.asarray(c), self.basis, axes=([-1], [0]))

    def algebra_residual(self, X: np.ndarray) -> float:
        X = np.asarray(X)
        return float(np.max(np.abs(self.from_coords(self.coords(X)) - X), initial=0.0))

    def in_algebra(self, X: np.ndarray, tol: float = ALG_TOL) -> bool:
        scale = max(1.0, float(np.max(np.abs(X), initial=0.0)))
        return self.algebra_residual(X) <= tol * scale

    def contains(self, M: np.ndarray, tol: float = MEMBER_TOL) -> bool:
        M = np.asarray(M)
        if M.shape != (self.dim, self.dim) or not np.all(np.isfinite(M)):
            return False
        if self.kind == "real" and np.iscomplexobj(M) and np.max(np.abs(M.imag)) > tol:
            return False
        return bool(self.member(M, tol))

    @cached_property
    def structure_constants(self) -> np.ndarray:
        """``f[c, a, b]`` with ``[T_a, T_b] = f^c_{ab} T_c``."""
        m = self.alg_dim
        f = np.zeros((m, m, m))
        worst = 0.0
        for a in range(m):
            for b in range(m):
                br = self.basis[a] @ self.basis[b] - self.basis[b] @ self.basis[a]
                c = self.coords(br)
                worst = max(worst, float(np.max(np.abs(self.from_coords(c) - br), initial=0.0)))
                f[:, a, b] = c
        if worst > 1e-10:
            raise StructureConstantError(f"{self.name}: basis does not close under bracket (residual {worst:.2e})")
        return f

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex if self.kind == "complex" else float)

    def random_algebra(self, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        return self.from_coords(scale * rng.normal(size=self.alg_dim))

    def level_basis(self, level: int) -> np.ndarray:
        if self.grading is None:
            raise TwistGaugeError(f"{self.name}: no grading declared")
        return self.basis[[i for i, g in enumerate(self.grading) if g == level]]

    def alg(self, X) -> "AlgElem":
        return AlgElem(np.asarray(X), self)

    def elem(self, M) -> "GrpElem":
        return GrpElem(np.asarray(M), self)

    def __repr__(self) -> str:
        return f"GroupSpec({self.name!r}, dim={self.dim}, alg_dim={self.alg_dim})"


@dataclass(frozen=True)
class AlgElem:
    matrix: np.ndarray
    group: GroupSpec

    def __post_init__(self):
        if not self.group.in_algebra(self.matrix):
            raise NotInGroup(f"matrix is not in the algebra of {self.group.name}")


@dataclass(frozen=True)
class GrpElem:
    matrix: np.ndarray
    group: GroupSpec

    def __post_init__(self):
        if not self.group.contains(self.matrix):
            raise NotInGroup(f"matrix is not a member of {self.group.name}")

    def __matmul__(self, other: "GrpElem") -> "GrpElem":
        _same(self.group, other.group)
        return GrpElem(self.matrix @ other.matrix, self.group)

    def inverse(self) -> "GrpElem":
        return GrpElem(np.linalg.inv(self.matrix), self.group)


def _same(a: GroupSpec, b: GroupSpec) -> None:
    if a is not b:
        raise GroupMismatch(f"group mismatch: {a.name} vs {b.name}")


# --------------------------------------------------------------------------
# basic operations


def exp_alg(X: AlgElem | np.ndarray) -> GrpElem | np.ndarray:
    """Matrix exponential (scaling and squaring, Padé 13)."""
    if isinstance(X, AlgElem):
        return GrpElem(exp_alg(X.matrix), X.group)
    X = np.asarray(X)
    if not np.all(np.isfinite(X)):
        raise FloatingPointError("non-finite algebra element")
    out = scipy.linalg.expm(X)
    return out.real if not np.iscomplexobj(X) else out


def log_grp(M: GrpElem | np.ndarray, real: bool | None = None) -> AlgElem | np.ndarray:
    """Principal matrix logarithm; refuses eigenvalues on the cut."""
    if isinstance(M, GrpElem):
        return AlgElem(log_grp(M.matrix, real=M.group.real_group), M.group)
    M = np.asarray(M)
    if real is None:
        real = not np.iscomplexobj(M)
    ev = np.linalg.eigvals(M)
    if np.any(np.abs(ev) < 1e-14):
        raise LogDomainError("matrix logarithm of a singular matrix")
    if real and np.any((np.abs(ev.imag) <= 1e-12 * np.maximum(1.0, np.abs(ev))) & (ev.real < 0)):
        raise LogDomainError("real matrix has an eigenvalue on the closed negative axis")
    out = scipy.linalg.logm(M)
    if real:
        out = np.real_if_close(out, tol=1e6)
        out = out.real
    return out


def bracket(X, Y):
    if isinstance(X, AlgElem) or isinstance(Y, AlgElem):
        _same(X.group, Y.group)
        return AlgElem(X.matrix @ Y.matrix - Y.matrix @ X.matrix, X.group)
    return X @ Y - Y @ X


def adjoint(g, X):
    """Ad_g X = g X g⁻¹."""
    if isinstance(g, GrpElem):
        _same(g.group, X.group)
        return AlgElem(adjoint(g.matrix, X.matrix), g.group)
    return g @ X @ np.linalg.inv(g)


KILLING_CONVENTIONS = ("trace", "hermitian", "spin")


def killing(M, N, convention: str = "trace"):
    """Trace forms on matrix algebras.

    ``trace``      Tr(MN)
    ``hermitian``  ½(Tr(MN) + Tr(N*M*)) = Re Tr(MN)
    ``spin``       4 × ``hermitian``.  This is the normalization under which
                   the spin isomorphism sl(2,C) → so(1,3) is an isometry for
                   the plain trace on the vector representation.

    Also accepts stacked arrays (..., d, d).
    """
    if isinstance(M, AlgElem) or isinstance(N, AlgElem):
        _same(M.group, N.group)
        M, N = M.matrix, N.matrix
    tr = np.einsum("...ij,...ji->...", M, N)
    if convention == "trace":
        return tr
    if convention == "hermitian":
        return 0.5 * (tr + np.conj(tr))
    if convention == "spin":
        return 2.0 * (tr + np.conj(tr))
    raise ValueError(f"unknown Killing convention {convention!r}; choose from {KILLING_CONVENTIONS}")


@dataclass(frozen=True, eq=False)
class SemidirectSpec:
    """G ⋊ K realized inside one matrix group, with K acting by conjugation."""

    normal: GroupSpec
    acting: GroupSpec
    embed_normal: Callable[[np.ndarray], np.ndarray] = lambda g: g
    embed_acting: Callable[[np.ndarray], np.ndarray] = lambda k: k

    def act(self, k: np.ndarray, g: np.ndarray) -> np.ndarray:
        """k g k⁻¹ in the embedded picture."""
        K = self.embed_acting(k)
        return K @ self.embed_normal(g) @ np.linalg.inv(K)

    def to_matrix(self, pair) -> np.ndarray:
        g, k = pair
        return self.embed_normal(g) @ self.embed_acting(k)


def semidirect_compose(spec: SemidirectSpec, a, b):
    """(g, k)·(g′, k′) = (g·(k g′ k⁻¹), k k′), factors in the embedded picture."""
    g, k = a
    g2, k2 = b
    return (spec.embed_normal(g) @ spec.act(k, g2), k @ k2)


# --------------------------------------------------------------------------
# spin maps


def spin_iso(x) -> np.ndarray:
    """Vector x^a ↦ hermitian x̄ = x^a σ_a (works on (..., 4))."""
    return np.einsum("...a,aij->...ij", np.asarray(x), SIGMA)


def spin_iso_dual(r) -> np.ndarray:
    """Covector r_a ↦ r̄ = r_a σ_a; for r = η x this is adj(x̄)."""
    return np.einsum("...a,aij->...ij", np.asarray(r), SIGMA)


def covector_bar(r) -> np.ndarray:
    """Covector r_a ↦ r_a·Pauli_a = 2 r̄, the trace-dual of ``spin_iso``.

    Tr(covector_bar(r) · spin_iso(x)) = r_a x^a.  Covector-valued blocks of
    twistor objects (translations Ῡ, Schouten P̄) use this map; it is the
    normalization for which the tractor→twistor map is a homomorphism.
    """
    return 2.0 * spin_iso_dual(r)


def spin_iso_inverse(xb) -> np.ndarray:
    """Hermitian x̄ ↦ x^a = 2 Tr(x̄ σ_a)."""
    return 2.0 * np.einsum("...ij,aji->...a", np.asarray(xb), SIGMA).real


def double_cover(Sb: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """SL(2,C) → SO+(1,3): S^a_b = 2 Re Tr(σ_a S̄ σ_b S̄*)."""
    Sb = np.asarray(Sb, dtype=complex)
    if abs(np.linalg.det(Sb) - 1.0) > tol:
        raise NotInGroup("double_cover needs det S̄ = 1")
    return 2.0 * np.einsum("aij,jk,bkl,li->ab", SIGMA, Sb, SIGMA, Sb.conj().T).real


def spin_alg_to_so(sb: np.ndarray) -> np.ndarray:
    """Algebra map sl(2,C) → so(1,3): s x ↔ s̄ x̄ + x̄ s̄*."""
    sb = np.asarray(sb)
    return 2.0 * (np.einsum("aij,...jk,bki->...ab", SIGMA, sb, SIGMA)
                  + np.einsum("aij,bjk,...ki->...ab", SIGMA, SIGMA, np.conj(np.swapaxes(sb, -1, -2)))).real


@lru_cache(maxsize=None)
def _so_to_spin_tensor() -> np.ndarray:
    """Complex tensor K with s̄ = K · s, solved once by least squares."""
    sl = sl2c()
    so = so13()
    images = np.array([spin_alg_to_so(b) for b in sl.basis])  # (6, 4, 4)
    # coords of the images in the so(1,3) basis
    m = so.coords(images)  # (6 sl, 6 so)
    inv = np.linalg.inv(m)  # so coords -> sl coords
    # s̄ = Σ_b (Σ_a c_a(s) inv[a, b]) sl_b with c = so.coords(s) linear in s
    _, pinv = so._projector
    # so.coords(s) = concat(re, im) @ pinv.T ; s real -> only first 16 columns
    lin = pinv[:, :16]  # (6 so, 16)
    k = np.einsum("ak,ab,bij->ijk", lin, inv, sl.basis)  # (2,2,16)
    return k.reshape(2, 2, 4, 4)


def so_to_spin_alg(s: np.ndarray) -> np.ndarray:
    """Inverse algebra map so(1,3) → sl(2,C) (a fixed complex-linear tensor)."""
    return np.einsum("ijab,...ab->...ij", _so_to_spin_tensor(), np.asarray(s))


def tractor_to_twistor_alg(X: np.ndarray) -> np.ndarray:
    """Map a tractor-algebra element (6×6) to the twistor algebra (4×4).

    Blocks are read as (ε, ι, τ, s) and sent to
    [[-(s̄ - ε/2)*, -i ι̂], [i τ̄, s̄ - ε/2]], with τ̄ = spin_iso(τ) and
    ι̂ = covector_bar(ι).
    """
    X = np.asarray(X)
    eps = X[..., 0, 0]
    iota = X[..., 0, 1:5]
    tau = X[..., 1:5, 0]
    s = X[..., 1:5, 1:5]
    sb = so_to_spin_alg(s) - 0.5 * eps[..., None, None] * np.eye(2)
    out = np.zeros(X.shape[:-2] + (4, 4), dtype=complex)
    out[..., :2, :2] = -np.conj(np.swapaxes(sb, -1, -2))
    out[..., :2, 2:] = -1j * covector_bar(iota)
    out[..., 2:, :2] = 1j * spin_iso(tau)
    out[..., 2:, 2:] = sb
    return out


# --------------------------------------------------------------------------
# catalog helpers


def _E(d, i, j, dtype=float):
    m = np.zeros((d, d), dtype=dtype)
    m[i, j] = 1
    return m


def _lorentz_basis() -> np.ndarray:
    out = []
    for a, b in itertools.combinations(range(4), 2):
        m = np.zeros((4, 4))
        m[a, b] = ETA[b, b]
        m[b, a] = -ETA[a, a]
        out.append(m)
    return np.array(out)


def _is_lorentz(M, tol):
    M = np.real(M)
    return np.max(np.abs(M.T @ ETA @ M - ETA)) <= tol and abs(np.linalg.det(M) - 1) <= tol and M[0, 0] > 0


def lorentz_embed(S: np.ndarray, size: int = 6, algebra: bool = False) -> np.ndarray:
    """diag(1, S, 1) for tractors (size 6) or diag(S, 1) for Poincaré (size 5).

    With ``algebra=True`` the padding entries are 0 instead of 1.
    """
    S = np.asarray(S)
    pad = 0 if algebra else 1
    out = np.zeros(S.shape[:-2] + (size, size), dtype=S.dtype)
    if size == 6:
        out[..., 0, 0] = pad
        out[..., 5, 5] = pad
        out[..., 1:5, 1:5] = S
    elif size == 5:
        out[..., :4, :4] = S
        out[..., 4, 4] = pad
    else:
        raise ShapeMismatch("lorentz_embed size must be 5 or 6")
    return out


def spin_embed(Sb: np.ndarray) -> np.ndarray:
    """diag(S̄^{-1*}, S̄)."""
    Sb = np.asarray(Sb, dtype=complex)
    out = np.zeros(Sb.shape[:-2] + (4, 4), dtype=complex)
    out[..., :2, :2] = np.conj(np.swapaxes(np.linalg.inv(Sb), -1, -2))
    out[..., 2:, 2:] = Sb
    return out


def tractor_element(z: float, r: np.ndarray) -> np.ndarray:
    """The tractor dilation/translation element with parameters (z, r_a)."""
    r = np.asarray(r, dtype=float)
    rt = ETA @ r
    M = np.zeros((6, 6))
    M[0, 0] = z
    M[0, 1:5] = r
    M[0, 5] = r @ rt / (2 * z)
    M[1:5, 1:5] = np.eye(4)
    M[1:5, 5] = rt / z
    M[5, 5] = 1 / z
    return M


def twistor_element(z: float, ups: np.ndarray) -> np.ndarray:
    """The twistor element with real z > 0 and hermitian 2×2 Ῡ."""
    ups = np.asarray(ups, dtype=complex)
    M = np.zeros((4, 4), dtype=complex)
    M[:2, :2] = np.sqrt(z) * np.eye(2)
    M[:2, 2:] = -1j * ups / np.sqrt(z)
    M[2:, 2:] = np.eye(2) / np.sqrt(z)
    return M


# --------------------------------------------------------------------------
# catalog


@lru_cache(maxsize=None)
def so13() -> GroupSpec:
    return GroupSpec("SO(1,3)", 4, "real", _lorentz_basis(), _is_lorentz)


@lru_cache(maxsize=None)
def sl2c() -> GroupSpec:
    basis = np.array([p for p in _PAULI[1:]] + [1j * p for p in _PAULI[1:]]) * 0.5
    return GroupSpec("SL(2,C)", 2, "complex", basis, lambda M, tol: abs(np.linalg.det(M) - 1) <= tol, real_group=False)


@lru_cache(maxsize=None)
def weyl_dilations() -> GroupSpec:
    """W: positive reals as 1×1 matrices."""
    return GroupSpec("W", 1, "real", np.ones((1, 1, 1)), lambda M, tol: np.real(M[0, 0]) > 0)


def _tractor_g_basis():
    eps = np.diag([1.0, 0, 0, 0, 0, -1.0])
    iota = []
    for a in range(4):
        m = _E(6, 0, 1 + a)
        m[1 + a, 5] = ETA[a, a]
        iota.append(m)
    return eps, iota


def _tractor_params(M):
    z = M[0, 0]
    r = M[0, 1:5]
    return z, r


def _in_tractor_G(M, tol):
    M = np.real(M)
    z, r = _tractor_params(M)
    if z <= 0:
        return False
    return np.max(np.abs(M - tractor_element(z, r))) <= tol * max(1.0, np.max(np.abs(M)))


def _in_tractor_G_SO(M, tol):
    M = np.real(M)
    S = M[1:5, 1:5]
    if not _is_lorentz(S, tol):
        return False
    return _in_tractor_G(M @ lorentz_embed(np.linalg.inv(S)), tol)


@lru_cache(maxsize=None)
def tractor_G() -> GroupSpec:
    eps, iota = _tractor_g_basis()
    return GroupSpec("tractor G", 6, "real", np.array([eps] + iota), _in_tractor_G, grading=(0, 1, 1, 1, 1))


@lru_cache(maxsize=None)
def tractor_G_SO() -> GroupSpec:
    eps, iota = _tractor_g_basis()
    lor = [lorentz_embed(b, algebra=True) for b in _lorentz_basis()]
    return GroupSpec("tractor G⋊SO", 6, "real", np.array([eps] + lor + iota), _in_tractor_G_SO,
                     grading=(0,) * 7 + (1,) * 4)


def _tau_basis():
    out = []
    for a in range(4):
        m = _E(6, 1 + a, 0)
        m[5, 1 + a] = ETA[a, a]
        out.append(m)
    return out


@lru_cache(maxsize=None)
def tractor_full() -> GroupSpec:
    """so(2,4) in the tractor metric, graded τ (−1), ε and s (0), ι (+1)."""
    eps, iota = _tractor_g_basis()
    lor = [lorentz_embed(b, algebra=True) for b in _lorentz_basis()]
    basis = np.array(_tau_basis() + [eps] + lor + iota)

    def member(M, tol):
        M = np.real(M)
        return np.max(np.abs(M.T @ H_TRACTOR @ M - H_TRACTOR)) <= tol and abs(np.linalg.det(M) - 1) <= tol

    return GroupSpec("tractor G'", 6, "real", basis, member, grading=(-1,) * 4 + (0,) * 7 + (1,) * 4)


def _herm_basis():
    return [SIGMA[a] * 2 for a in range(4)]


def _twistor_g_basis():
    eps = np.diag([0.5, 0.5, -0.5, -0.5]).astype(complex)
    iota = []
    for h in _herm_basis():
        m = np.zeros((4, 4), dtype=complex)
        m[:2, 2:] = -1j * h
        iota.append(m)
    return eps, iota


def _twistor_params(M):
    br = M[2:, 2:]
    d = np.linalg.det(br)
    if abs(d.imag) > 1e-9 or d.real <= 0:
        return None
    z = 1.0 / d.real
    return z


def _in_twistor_G(M, tol):
    M = np.asarray(M, dtype=complex)
    z = _twistor_params(M)
    if z is None:
        return False
    ups = 1j * np.sqrt(z) * M[:2, 2:]
    if np.max(np.abs(ups - ups.conj().T)) > tol:
        return False
    return np.max(np.abs(M - twistor_element(z, ups))) <= tol * max(1.0, np.max(np.abs(M)))


def _in_twistor_G_SL(M, tol):
    M = np.asarray(M, dtype=complex)
    z = _twistor_params(M)
    if z is None:
        return False
    Sb = np.sqrt(z) * M[2:, 2:]
    if abs(np.linalg.det(Sb) - 1) > tol:
        return False
    return _in_twistor_G(M @ np.linalg.inv(spin_embed(Sb)), tol)


@lru_cache(maxsize=None)
def twistor_G() -> GroupSpec:
    eps, iota = _twistor_g_basis()
    return GroupSpec("twistor G", 4, "complex", np.array([eps] + iota), _in_twistor_G, grading=(0,) + (1,) * 4)


def _spin_block_basis():
    out = []
    for b in sl2c().basis:
        m = np.zeros((4, 4), dtype=complex)
        m[:2, :2] = -b.conj().T
        m[2:, 2:] = b
        out.append(m)
    return out


@lru_cache(maxsize=None)
def twistor_G_SL() -> GroupSpec:
    eps, iota = _twistor_g_basis()
    return GroupSpec("twistor G⋊SL", 4, "complex", np.array([eps] + _spin_block_basis() + iota), _in_twistor_G_SL,
                     grading=(0,) * 7 + (1,) * 4)


@lru_cache(maxsize=None)
def twistor_full() -> GroupSpec:
    """su(2,2) for the split hermitian form, graded like the tractor case."""
    eps, iota = _twistor_g_basis()
    tau = []
    for h in _herm_basis():
        m = np.zeros((4, 4), dtype=complex)
        m[2:, :2] = 1j * h
        tau.append(m)
    basis = np.array(tau + [eps] + _spin_block_basis() + iota)

    def member(M, tol):
        M = np.asarray(M, dtype=complex)
        return np.max(np.abs(M.conj().T @ H_TWISTOR @ M - H_TWISTOR)) <= tol and abs(np.linalg.det(M) - 1) <= tol

    return GroupSpec("twistor G'", 4, "complex", basis, member, grading=(-1,) * 4 + (0,) * 7 + (1,) * 4)


@lru_cache(maxsize=None)
def cstar() -> GroupSpec:
    """Nonzero complex scalars as 1×1 matrices."""
    return GroupSpec("C*", 1, "complex", np.array([[[1.0]], [[1j]]]), lambda M, tol: abs(M[0, 0]) > tol,
                     real_group=False)


@lru_cache(maxsize=None)
def su2() -> GroupSpec:
    basis = np.array([0.5j * p for p in _PAULI[1:]])

    def member(M, tol):
        return np.max(np.abs(M.conj().T @ M - np.eye(2))) <= tol and abs(np.linalg.det(M) - 1) <= tol

    return GroupSpec("SU(2)", 2, "complex", basis, member, real_group=False)


@lru_cache(maxsize=None)
def poincare() -> GroupSpec:
    """ISO(1,3) as 5×5 matrices [[S, t], [0, 1]]; translations are the quotient."""
    lor = [lorentz_embed(b, 5, algebra=True) for b in _lorentz_basis()]
    trans = [_E(5, a, 4) for a in range(4)]

    def member(M, tol):
        M = np.real(M)
        return _is_lorentz(M[:4, :4], tol) and np.max(np.abs(M[4] - _E(5, 4, 4)[4])) <= tol

    return GroupSpec("ISO(1,3)", 5, "real", np.array(lor + trans), member, grading=(0,) * 6 + (-1,) * 4)
