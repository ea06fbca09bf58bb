import numpy as np
import pytest

from twistgauge import cartan as K
from twistgauge import gauge as G
from twistgauge import lie
from twistgauge import samples as S
from twistgauge.cocycle import TractorCocycle, TwistorCocycle
from twistgauge.errors import DegenerateSoldering
from twistgauge.jets import FieldHandle, lift, stack

N = 4
SPLITS = [("tractor", K.tractor_split, TractorCocycle), ("twistor", K.twistor_split, TwistorCocycle)]


@pytest.fixture(params=SPLITS, ids=[s[0] for s in SPLITS])
def setup(request, rng):
    _, make_split, make_cocycle = request.param
    split = make_split()
    coc = make_cocycle(S.random_frame(rng))
    w = K.cartan_connection(S.random_connection_form(split.ambient, rng, N), split, coc)
    return rng, split, coc, w


def test_projection_kills_subalgebra_and_fixes_quotient(setup):
    _, split, _, _ = setup
    for b in split.sub.basis:
        assert np.abs(split.tau_array(b)).max() < 1e-12
    for b in split.quotient:
        assert np.abs(split.tau_array(b) - b).max() < 1e-12


def test_flat_model_has_unit_frame_and_no_curvature(setup, points):
    _, split, coc, _ = setup
    flat = K.flat_connection(split, coc)
    np.testing.assert_allclose(np.real(lift(K.vielbein_of(flat), points[0]).value), np.eye(N), atol=1e-12)
    assert G.max_abs_on(K.torsion(flat).form, points) < 1e-12
    assert G.max_abs_on(G.curvature(flat.conn).form, points) < 1e-12


def test_soldering_and_torsion_covariance(setup, points):
    rng, split, _, w = setup
    z = S.random_weyl_field(rng, N)
    wz = w.with_conn(G.transform_connection(w.conn, z))
    expected = K.quotient_projection(split, G.transform_tensorial(K.soldering(w), z).form)
    assert G.max_abs_on(K.soldering(wz).form - expected, points) < 1e-10
    expected = K.quotient_projection(split, G.transform_tensorial(G.curvature(w.conn), z).form)
    assert G.max_abs_on(K.torsion(wz).form - expected, points) < 1e-10


def test_grading_pieces_reassemble(setup, points):
    _, split, _, w = setup
    parts = K.grading_split(w, split)
    assert G.max_abs_on(parts[-1] + parts[0] + parts[1] - w.form, points) < 1e-12
    for level, piece in parts.items():
        assert max(K.level_residual(m, split, level) for m in piece.at(points[0])) < 1e-12


def test_random_connection_is_injective(setup, points):
    _, _, _, w = setup
    assert K.check_injectivity(w, points).passed


def test_reductive_torsion_agrees_with_projection(rng, points):
    ps, pc = K.poincare_split(), K.poincare_cocycle()
    w = K.cartan_connection(S.random_connection_form(ps.ambient, rng, N), ps, pc)
    assert G.max_abs_on(K.torsion(w).form - K.reductive_torsion(w), points) < 1e-12
    s = S.random_group_field(lie.so13(), rng, N)
    ws = w.with_conn(G.transform_connection(w.conn, s))
    expected = K.quotient_projection(ps, G.transform_tensorial(K.soldering(w), s).form)
    assert G.max_abs_on(K.soldering(ws).form - expected, points) < 1e-10


def test_metric_from_diagonal_frame():
    e = FieldHandle(lambda X: X.const(np.diag([2.0, 1, 1, 1])), N)
    g = K.metric_from_soldering(e)
    np.testing.assert_allclose(g.at(np.zeros(N)), np.diag([4.0, -1, -1, -1]), atol=1e-14)


def _collapsing_frame():
    return FieldHandle(lambda X: stack([X[0] * np.array([1.0, 0, 0, 0])] + [X.const(np.eye(N)[i]) for i in range(1, N)]),
                       N)


def test_injectivity_flags_the_degenerate_point():
    pts = np.array([[0, 0.1, 0.2, 0.3], [0.1, 0, 0, 0], [0.3, 0.2, 0.1, 0]])
    rep = K.check_injectivity(_collapsing_frame(), pts)
    assert not rep.passed
    assert rep.failing_points == [[0.0, 0.1, 0.2, 0.3]]


def test_metric_from_degenerate_frame_raises():
    with pytest.raises(DegenerateSoldering):
        K.metric_from_soldering(_collapsing_frame(), points=np.zeros((1, N)))
