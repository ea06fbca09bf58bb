import numpy as np
import pytest

from twistgauge import conformal as CF
from twistgauge import gauge as G
from twistgauge import lie
from twistgauge import samples as S
from twistgauge.errors import RepresentationNotUnitary
from twistgauge.forms import MetricField
from twistgauge.jets import Coords, FieldHandle, jexp

N = 4
ETA = lie.ETA


@pytest.fixture(scope="module")
def perturbed():
    rng = np.random.default_rng(4)
    e = S.random_frame(rng, scale=0.05)
    T = CF.tractor_connection(e)
    Tb = CF.twistor_connection(e, tractor=T)
    return rng, e, T, Tb, S.sample_points(rng, 2, N)


def test_schouten_of_exponential_rescaling():
    # g = exp(2φ)η with φ = c x⁰ has P = dφ⊗dφ − ½|dφ|²η
    c = 0.1
    g = MetricField.from_fn(lambda X: jexp(X[0] * (2 * c)) * np.diag([1.0, -1, -1, -1]))
    sd = CF.schouten(g)
    x = np.array([0.2, -0.1, 0.3, 0.05])
    dphi = np.array([c, 0, 0, 0])
    oracle = np.outer(dphi, dphi) - 0.5 * (dphi @ ETA @ dphi) * ETA
    np.testing.assert_allclose(sd.tensor.at(x), oracle, atol=1e-12)
    assert np.trace(np.linalg.inv(g.at(x)) @ sd.tensor.at(x)) == pytest.approx(float(sd.scalar.at(x)) / 6, abs=1e-12)


def test_spin_connection_of_conformal_frame():
    # e = Ω dx solves de + A∧e = 0 with A^{ab}_μ = (δ^a_μ ∂^bΩ − δ^b_μ ∂^aΩ)/Ω
    omega = FieldHandle(lambda X: (X[1] * 0.1 + 1.0) * np.eye(N), N)
    A = CF.spin_connection(omega)
    for x in (np.zeros(N), np.array([0.1, 0.4, -0.2, 0.3])):
        o, up = 1 + 0.1 * x[1], ETA @ np.array([0, 0.1, 0, 0])
        raised = (np.einsum("am,b->mab", np.eye(N), up) - np.einsum("bm,a->mab", np.eye(N), up)) / o
        expected = np.einsum("mac,cb->mab", raised, ETA)
        np.testing.assert_allclose(A.at(x), expected, atol=1e-12)


def test_vielbein_from_metric_reproduces_metric(rng):
    e = S.random_frame(rng, scale=0.05)
    g = CF.metric_from_vielbein(e)
    eh = CF.vielbein_from_metric(g)
    x = S.sample_points(rng, 1, N)[0]
    for a, b in zip(g(Coords(x, 3)).parts, CF.metric_from_vielbein(eh)(Coords(x, 3)).parts):
        np.testing.assert_allclose(a, b, atol=1e-10)
    M = ETA @ eh.at(x)
    np.testing.assert_allclose(M, M.T, atol=1e-12)


def test_minkowski_curvature_vanishes(points):
    e = FieldHandle(lambda X: X.const(np.eye(N)), N)
    T = CF.tractor_connection(e)
    assert G.max_abs_on(G.curvature(T.connection).form, points[:2]) < 1e-12


def test_lorentz_block_is_antisymmetric(perturbed):
    _, _, T, _, pts = perturbed
    for x in pts:
        low = np.einsum("ab,mbc->mac", ETA, T.A.at(x))
        np.testing.assert_allclose(low, -low.transpose(0, 2, 1), atol=1e-12)


def test_normalization_and_reassembly(perturbed):
    _, e, T, _, pts = perturbed
    blocks = CF.curvature_blocks(T)
    assert G.max_abs_on(blocks.f, pts) < 1e-8
    assert G.max_abs_on(blocks.T, pts) < 1e-8
    assert G.max_abs_on(CF.weyl_trace(blocks.W, e), pts) < 1e-8
    assert G.max_abs_on(blocks.W, pts) > 1e-4
    assert G.max_abs_on(blocks.reassemble() - G.curvature(T.connection).form, pts) < 1e-12


def test_twistor_blocks_are_hermitian(perturbed):
    _, _, _, Tb, pts = perturbed
    for x in pts:
        for f in (Tb.e_bar, Tb.P_bar):
            v = f.at(x)
            np.testing.assert_allclose(v, v.conj().transpose(0, 2, 1), atol=1e-12)


def test_three_lagrangians_agree(perturbed):
    _, _, T, Tb, pts = perturbed
    L = CF.lagrangian_conformal(T, Tb)
    for x in pts:
        a, b, c = L.at(x)
        assert abs(a) > 1e-8
        assert b == pytest.approx(a, rel=1e-7)
        assert c == pytest.approx(a, rel=1e-7)


def test_non_unitary_representation_is_rejected():
    basis = lie.so13().basis
    with pytest.raises(RepresentationNotUnitary):
        CF.check_unitary(lambda M: M, basis, np.eye(4))
    assert CF.check_unitary(lambda M: M, basis, ETA) < 1e-12
