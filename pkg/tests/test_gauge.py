import numpy as np
import pytest

from twistgauge import gauge as G
from twistgauge import lie
from twistgauge import samples as S
from twistgauge.cocycle import AbelianCocycle, MorphismCocycle, TractorCocycle, TwistorCocycle, field_inverse, field_product
from twistgauge.errors import BadPartition, GroupMismatch, RepresentationMismatch
from twistgauge.forms import exterior_derivative, wedge
from twistgauge.jets import FieldHandle

N = 4


@pytest.fixture(scope="module")
def tractor():
    rng = np.random.default_rng(11)
    c = TractorCocycle(S.random_frame(rng))
    A = G.ConnForm(S.random_connection_form(c.target, rng, N), c, mixed=True)
    phi = G.TensorialField(S.random_vector_form(rng, N, 6), G.VectorRep(6), c, True)
    pts = S.sample_points(rng, 3, N)
    return rng, c, A, phi, pts


def test_connection_is_algebra_valued(tractor):
    _, _, A, _, pts = tractor
    assert A.algebra_residual(pts) < 1e-12


def test_right_action(tractor):
    rng, _, A, _, pts = tractor
    g, h = S.random_weyl_field(rng, N), S.random_weyl_field(rng, N)
    twice = G.transform_connection(G.transform_connection(A, g), h)
    once = G.transform_connection(A, field_product(g, h))
    assert G.max_abs_on(twice.form - once.form, pts) < 1e-10


def test_curvature_covariance_and_bianchi(tractor):
    rng, _, A, _, pts = tractor
    g = S.random_weyl_field(rng, N)
    F = G.curvature(A)
    assert G.max_abs_on(G.curvature(G.transform_connection(A, g)).form - G.transform_tensorial(F, g).form, pts) < 1e-10
    assert G.max_abs_on(G.covariant_derivative(A, F).form, pts) < 1e-10


def test_covariant_derivative_covariance(tractor):
    rng, _, A, phi, pts = tractor
    g = S.random_weyl_field(rng, N)
    lhs = G.covariant_derivative(G.transform_connection(A, g), G.transform_tensorial(phi, g)).form
    rhs = G.transform_tensorial(G.covariant_derivative(A, phi), g).form
    assert G.max_abs_on(lhs - rhs, pts) < 1e-10


def test_second_covariant_derivative_is_curvature(tractor):
    _, _, A, phi, pts = tractor
    DD = G.covariant_derivative(A, G.covariant_derivative(A, phi)).form
    assert G.max_abs_on(DD - G.rho_star_wedge(G.curvature(A), phi), pts) < 1e-10


def test_pure_gauge_is_flat(tractor):
    rng, c, _, _, pts = tractor
    assert G.max_abs_on(G.curvature(G.pure_gauge(c, S.random_weyl_field(rng, N))).form, pts) < 1e-10


def test_mixed_transformations_commute(tractor):
    rng, _, A, _, pts = tractor
    g = S.random_weyl_field(rng, N)
    s = S.random_group_field(lie.so13(), rng, N, scale=0.2)
    one = G.transform_mixed(A, g, s)
    h_then_k = G.transform_mixed(G.transform_mixed(A, g), None, s)
    k_then_h = G.transform_mixed(G.transform_mixed(A, None, s), g)
    assert G.max_abs_on(one.form - h_then_k.form, pts) < 1e-10
    assert G.max_abs_on(one.form - k_then_h.form, pts) < 1e-10


def test_infinitesimal_matches_finite_difference(tractor):
    rng, _, A, phi, pts = tractor
    chi = S.random_algebra_field(lie.weyl_dilations(), rng, N)
    ups = S.random_algebra_field(lie.so13(), rng, N)
    assert G.max_abs_on(G.infinitesimal(A, chi, ups) - G.finite_variation(A, chi, ups), pts) < 1e-5
    assert G.max_abs_on(G.infinitesimal(phi, chi, ups) - G.finite_variation(phi, chi, ups), pts) < 1e-5


def test_k_transform_on_unmixed_field_raises(rng):
    su = lie.su2()
    B = G.ConnForm(S.random_connection_form(su, rng, N), MorphismCocycle(su))
    with pytest.raises(GroupMismatch):
        G.transform_mixed(B, None, S.random_group_field(su, rng, N))


def test_mismatched_representation_raises(tractor):
    rng, _, A, _, _ = tractor
    bad = G.TensorialField(S.random_vector_form(rng, N, 5), G.VectorRep(5), A.cocycle, True)
    with pytest.raises(RepresentationMismatch):
        G.covariant_derivative(A, bad)


def test_morphism_cocycle_reduces_to_yang_mills(rng, points):
    su = lie.su2()
    B = G.ConnForm(S.random_connection_form(su, rng, N), MorphismCocycle(su))
    g = S.random_group_field(su, rng, N)
    gf = G._zero_form_of(g, (2, 2))
    gi = G._zero_form_of(field_inverse(g), (2, 2))
    expected = wedge(wedge(gi, B.form), gf) + wedge(gi, exterior_derivative(gf))
    assert G.max_abs_on(G.transform_connection(B, g).form - expected, points) < 1e-12


def test_twistor_right_action(rng, points):
    c = TwistorCocycle(S.random_frame(rng))
    A = G.ConnForm(S.random_connection_form(c.target, rng, N), c, True)
    g, h = S.random_weyl_field(rng, N), S.random_weyl_field(rng, N)
    twice = G.transform_connection(G.transform_connection(A, g), h)
    assert G.max_abs_on(twice.form - G.transform_connection(A, field_product(g, h)).form, points) < 1e-10


def test_gluing_equals_gauge_action(tractor):
    rng, _, A, _, pts = tractor
    g = S.random_weyl_field(rng, N)
    assert G.max_abs_on(G.glue(A, G.OverlapData(g)).form - G.transform_connection(A, g).form, pts) < 1e-12


ABELIAN = AbelianCocycle(v=np.array([0.3, -0.7, 0.2, 0.5]), q=2, lam=0.8)
PARTITION = G.PartitionOfUnity(boxes=[((-1,) * 4, (0.3,) * 4), ((-0.3,) * 4, (1,) * 4)])


def test_single_dressing_is_flat(rng, points):
    gam = G.dressing_connection(ABELIAN, S.random_cstar_field(rng, N))
    assert G.max_abs_on(G.curvature(gam).form, points) < 1e-12
    assert G.max_abs_on(gam.form, points) > 1e-3


def test_glued_dressings_carry_curvature_tensorially(rng):
    u1, u2, g = S.random_cstar_field(rng, N), S.random_cstar_field(rng, N), S.random_cstar_field(rng, N)
    overlap = rng.uniform(-0.25, 0.25, size=(3, N))
    glued = G.glued_dressing_connection(ABELIAN, [u1, u2], PARTITION, overlap)
    Om = G.curvature(glued)
    assert G.max_abs_on(Om.form, overlap) > 1e-6
    regauged = G.glued_dressing_connection(ABELIAN, [field_product(field_inverse(g), u1),
                                                     field_product(field_inverse(g), u2)], PARTITION)
    assert G.max_abs_on(G.curvature(regauged).form - G.transform_tensorial(Om, g).form, overlap) < 1e-10


def test_partition_sums_to_one(rng):
    inside = rng.uniform(-0.9, 0.9, size=(6, N))
    inside[:, 1:] = np.clip(inside[:, 1:], -0.25, 0.25)
    assert PARTITION.check(inside, N) < 1e-12


def test_partition_needs_one_weight_per_dressing(rng):
    with pytest.raises(BadPartition):
        G.glued_dressing_connection(ABELIAN, [S.random_cstar_field(rng, N)], PARTITION)


def test_constant_dressing_gives_zero_connection(rng, points):
    su = lie.su2()
    u0 = lie.exp_alg(su.random_algebra(rng, 0.3))
    gam = G.dressing_connection(MorphismCocycle(su), FieldHandle(lambda X: X.const(u0), N))
    assert G.max_abs_on(gam.form, points) < 1e-14
