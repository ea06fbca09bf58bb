import numpy as np
import pytest
from hypothesis import given, strategies as st

from twistgauge import lie
from twistgauge.cartan import level_residual, tractor_split, twistor_split
from twistgauge.errors import LogDomainError, NotInGroup

seeds = st.integers(0, 2**32 - 1)
GROUPS = [lie.so13, lie.sl2c, lie.su2, lie.weyl_dilations, lie.tractor_G_SO, lie.twistor_G_SL, lie.poincare,
          lie.cstar, lie.tractor_G, lie.twistor_G]


@pytest.mark.parametrize("make", GROUPS, ids=lambda f: f.__name__)
def test_exp_lands_in_group_and_log_inverts(make, rng):
    grp = make()
    for _ in range(5):
        X = grp.random_algebra(rng, 0.5)
        M = lie.exp_alg(X)
        assert grp.contains(M)
        np.testing.assert_allclose(lie.log_grp(M), X, atol=1e-10)


def test_log_outside_principal_domain_is_rejected():
    rot = np.diag([1.0, -1.0, -1.0, 1.0])  # rotation by π about the third axis
    with pytest.raises(LogDomainError):
        lie.log_grp(rot, real=True)


def test_non_member_group_element_is_rejected():
    with pytest.raises(NotInGroup):
        lie.GrpElem(np.diag([2.0, 1.0, 1.0, 1.0]), lie.so13())


def test_spin_isomorphism_determinant_oracle(rng):
    for x in rng.normal(size=(20, 4)):
        assert 4 * np.linalg.det(lie.spin_iso(x)).real == pytest.approx(x @ lie.ETA @ x, abs=1e-12)


def test_killing_normalizations_differ_by_exactly_four(rng):
    so = lie.so13()
    for _ in range(10):
        s, t = so.random_algebra(rng), so.random_algebra(rng)
        sb, tb = lie.so_to_spin_alg(s), lie.so_to_spin_alg(t)
        tr = lie.killing(s, t)
        assert lie.killing(sb, tb, "spin").real == pytest.approx(tr, abs=1e-10)
        assert lie.killing(sb, tb, "hermitian").real == pytest.approx(tr / 4, abs=1e-10)


def test_rotation_generator_trace_values():
    J = np.zeros((4, 4))
    J[1, 2], J[2, 1] = -1.0, 1.0
    assert lie.killing(J, J) == pytest.approx(-2.0)
    Jb = lie.so_to_spin_alg(J)
    assert lie.killing(Jb, Jb, "hermitian").real == pytest.approx(-0.5)


def test_double_cover_intertwines_the_spin_map(rng):
    sl = lie.sl2c()
    Sb = lie.exp_alg(sl.random_algebra(rng, 0.5))
    L = lie.double_cover(Sb)
    assert lie.so13().contains(L)
    x = rng.normal(size=4)
    np.testing.assert_allclose(lie.spin_iso(L @ x), Sb @ lie.spin_iso(x) @ Sb.conj().T, atol=1e-12)


def test_spin_algebra_maps_are_inverse(rng):
    s = lie.so13().random_algebra(rng)
    np.testing.assert_allclose(lie.spin_alg_to_so(lie.so_to_spin_alg(s)), s, atol=1e-12)


@given(seeds)
def test_adjoint_matches_exponential_series(seed):
    from math import factorial

    r = np.random.default_rng(seed)
    grp = lie.tractor_full()
    X, M = grp.random_algebra(r, 0.3), grp.random_algebra(r)
    series, term = M.copy(), M.copy()
    for k in range(1, 30):
        term = X @ term - term @ X
        series = series + term / factorial(k)
    np.testing.assert_allclose(lie.adjoint(lie.exp_alg(X), M), series, atol=1e-10)


@given(seeds)
def test_bracket_jacobi_identity(seed):
    r = np.random.default_rng(seed)
    grp = lie.so13()
    X, Y, Z = (grp.random_algebra(r) for _ in range(3))
    br = lambda a, b: a @ b - b @ a
    total = br(X, br(Y, Z)) + br(Y, br(Z, X)) + br(Z, br(X, Y))
    np.testing.assert_allclose(total, 0.0, atol=1e-12)


@pytest.mark.parametrize("split", [tractor_split, twistor_split], ids=["tractor", "twistor"])
def test_parabolic_algebras_are_graded(split):
    sp = split()
    amb = sp.ambient
    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            for X in amb.level_basis(i):
                for Y in amb.level_basis(j):
                    br = X @ Y - Y @ X
                    if abs(i + j) > 1:
                        assert np.max(np.abs(br)) <= 1e-12
                    else:
                        assert level_residual(br, sp, i + j) <= 1e-10


def test_structure_constants_reproduce_brackets():
    grp = lie.so13()
    f = grp.structure_constants
    for a, X in enumerate(grp.basis):
        for b, Y in enumerate(grp.basis):
            np.testing.assert_allclose(X @ Y - Y @ X, np.einsum("c,cij->ij", f[:, a, b], grp.basis), atol=1e-12)
