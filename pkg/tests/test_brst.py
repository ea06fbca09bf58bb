import numpy as np
import pytest

from twistgauge import brst as B
from twistgauge import gauge as G
from twistgauge import lie
from twistgauge import samples as S
from twistgauge.cocycle import MorphismCocycle, TractorCocycle
from twistgauge.errors import GradingError
from twistgauge.forms import constant_form

N = 4


@pytest.fixture(scope="module")
def su2_system():
    rng = np.random.default_rng(7)
    su = lie.su2()
    m = MorphismCocycle(su)
    A = G.ConnForm(S.random_connection_form(su, rng, N), m)
    chis = [S.random_algebra_field(su, rng, N) for _ in range(su.alg_dim)]
    sysm = B.BrstSystem.build(A.form, S.random_vector_form(rng, N, 2), G.curvature(A).form,
                              B.ghost_components(m, chis))
    return A, chis, sysm, S.sample_points(rng, 2, N)


def _unit(value):
    return B.GrassmannElem.from_form(constant_form(0, N, np.asarray(value, float)))


def test_generators_square_to_zero_and_anticommute():
    one = constant_form(0, N, np.eye(2))
    x1 = B.GrassmannElem.ghost([one], offset=0)
    x2 = B.GrassmannElem.ghost([one], offset=1)
    assert not x1.mul(x1).terms
    s = x1.mul(x2) + x2.mul(x1)
    assert s.max_abs(np.zeros((1, N))) == 0.0
    np.testing.assert_allclose(x1.mul(x2).coefficient((0, 1), 0).at(np.zeros(N)), np.eye(2))
    np.testing.assert_allclose(x2.mul(x1).coefficient((0, 1), 0).at(np.zeros(N)), -np.eye(2))


def test_ghost_degree_is_truncated():
    one = constant_form(0, N, np.eye(2))
    gens = [B.GrassmannElem.ghost([one], offset=k) for k in range(B.MAX_GHOST_DEGREE + 1)]
    prod = gens[0]
    for g in gens[1:]:
        prod = prod.mul(g)
    assert not prod.terms


def test_ghost_squares_are_nilpotent(su2_system):
    _, _, sysm, pts = su2_system
    rep = B.check_nilpotency(sysm, B.twisted_rules(), pts)
    assert rep.passed, rep.residuals
    assert set(rep.residuals) == {"A", "F", "phi", "c"}


def test_wrong_ghost_sign_breaks_nilpotency(su2_system):
    _, _, sysm, pts = su2_system
    rules = B.twisted_rules()
    c = B.ghost("c")
    rules["c"] = 0.5 * B.bracket(c, c)
    rep = B.check_nilpotency(sysm, rules, pts, names=["A", "c"])
    assert not rep.passed
    assert rep.residuals["A"] > 1e-3


def test_linear_part_matches_infinitesimal_gauge_variation(su2_system):
    A, chis, sysm, pts = su2_system
    sA = B.evaluate(B.brst(B.atom("A", 1), B.twisted_rules()), sysm)
    for a, chi in enumerate(chis):
        assert G.max_abs_on(sA.coefficient((a,), 1) - G.infinitesimal(A, chi), pts) < 1e-10


def test_curvature_rule_follows_from_connection_rule(su2_system):
    _, _, sysm, pts = su2_system
    R = B.twisted_rules()
    A = B.atom("A", 1)
    derived = B.evaluate(B.brst(B.d(A) + A * A, R), sysm)
    assert (derived - B.evaluate(R["F"], sysm)).max_abs(pts) < 1e-10


def test_s_anticommutes_with_d(su2_system):
    _, _, sysm, pts = su2_system
    R = B.twisted_rules()
    X = B.atom("A", 1)
    assert B.evaluate(B.brst(B.d(X), R) + B.d(B.brst(X, R)), sysm).max_abs(pts) < 1e-12


def test_brst_raises_ghost_degree_by_one():
    R = B.twisted_rules()
    for x in (B.atom("A", 1), B.atom("F", 2), B.ghost("c")):
        assert B.brst(x, R).ghost_degree == x.ghost_degree + 1


def test_bracket_of_odd_ghosts_is_symmetric_product():
    c = B.ghost("c")
    br = B.bracket(c, c)
    assert br.ghost_degree == 2


def test_unknown_atom_raises():
    with pytest.raises(B.GhostNotInstantiated):
        B.brst(B.atom("Q", 1), B.twisted_rules())


def test_uninstantiated_ghost_raises(su2_system):
    _, _, sysm, _ = su2_system
    with pytest.raises(B.GhostNotInstantiated):
        B.evaluate(B.ghost("v"), sysm)


def test_vector_times_matrix_is_rejected():
    vec = B.GrassmannElem.from_form(constant_form(0, N, np.ones(2)), kind="vector")
    with pytest.raises(GradingError):
        vec.mul(_unit(np.eye(2)))


def test_mixed_sector_relations(rng, points):
    c = TractorCocycle(S.random_frame(rng))
    A = G.ConnForm(S.random_connection_form(c.target, rng, N), c, True)
    chi = [S.random_algebra_field(lie.weyl_dilations(), rng, N)]
    ups = [S.random_algebra_field(lie.so13(), rng, N) for _ in range(2)]
    sysm = B.BrstSystem.build(A.form, None, G.curvature(A).form, B.ghost_components(c, chi),
                              B.k_ghost_components(c, ups))
    pts = points[:2]
    R = B.mixed_rules()
    rep = B.check_nilpotency(sysm, R, pts, names=["A", "c", "v"])
    assert rep.passed, rep.residuals
    sc = B.evaluate(B.brst(B.ghost("c"), R), sysm)
    cv = B.evaluate(B.bracket(B.ghost("c"), B.ghost("v")), sysm)
    assert (sc.restrict(sysm.k_generators) + cv).max_abs(pts) < 1e-12
    sv = B.evaluate(B.brst(B.ghost("v"), R), sysm)
    assert sv.restrict(sysm.h_generators).max_abs(pts) == 0.0
    sA = B.evaluate(B.brst(B.atom("A", 1), R), sysm)
    assert G.max_abs_on(sA.coefficient((0,), 1) - G.infinitesimal(A, chi[0]), pts) < 1e-9
    assert G.max_abs_on(sA.coefficient((2,), 1) - G.infinitesimal(A, None, ups[1]), pts) < 1e-9
