import numpy as np
import pytest
from hypothesis import given, strategies as st

from twistgauge.errors import DegreeOverflow, ShapeMismatch
from twistgauge.forms import (MATMUL, MUL, MetricField, constant_form, exterior_derivative, form, hodge_star,
                              levi_civita, wedge, zero_form)
from twistgauge.samples import random_polynomial

seeds = st.integers(0, 2**32 - 1)
N = 4


def scalar_one_form(r):
    return form(1, N, (), random_polynomial(r, N, (N,), 2, 4, 0.5))


def matrix_one_form(r):
    return form(1, N, (2, 2), random_polynomial(r, N, (N, 2, 2), 2, 4, 0.5))


def coordinate_one_form(mu):
    c = np.zeros(N)
    c[mu] = 1.0
    return constant_form(1, N, c)


@given(seeds)
def test_leibniz_rule(seed):
    r = np.random.default_rng(seed)
    a, b, c = matrix_one_form(r), matrix_one_form(r), matrix_one_form(r)
    ab = wedge(a, b)
    x = r.uniform(-0.5, 0.5, N)
    lhs = exterior_derivative(wedge(ab, c)).at(x)
    rhs = (wedge(exterior_derivative(ab), c) + wedge(ab, exterior_derivative(c))).at(x)
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)
    lhs = exterior_derivative(ab).at(x)
    rhs = (wedge(exterior_derivative(a), b) - wedge(a, exterior_derivative(b))).at(x)
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


@given(seeds)
def test_d_squared_vanishes(seed):
    r = np.random.default_rng(seed)
    a = scalar_one_form(r)
    x = r.uniform(-0.5, 0.5, N)
    np.testing.assert_allclose(exterior_derivative(exterior_derivative(a)).at(x), 0.0, atol=1e-12)


@given(seeds)
def test_repeated_vector_gives_exact_zero(seed):
    r = np.random.default_rng(seed)
    w = wedge(scalar_one_form(r), scalar_one_form(r), MUL)
    x, v = r.uniform(-0.5, 0.5, N), r.normal(size=N)
    assert w(x, v, v) == 0.0


def test_wedge_of_coordinate_forms_evaluates_to_determinant():
    w = wedge(coordinate_one_form(0), coordinate_one_form(1), MUL)
    u, v = np.array([1.0, 2, 0, 0]), np.array([3.0, 5, 0, 0])
    assert w(np.zeros(N), u, v) == pytest.approx(1 * 5 - 2 * 3)


def test_hodge_star_minkowski_orientation():
    w = wedge(coordinate_one_form(0), coordinate_one_form(1), MUL)
    s = hodge_star(w, MetricField.minkowski()).at(np.zeros(N))
    expected = np.zeros((N, N))
    expected[2, 3], expected[3, 2] = -1.0, 1.0
    np.testing.assert_allclose(s, expected, atol=1e-14)


@given(seeds, st.floats(-3, 3), st.floats(-3, 3))
def test_hodge_star_is_linear(seed, alpha, beta):
    r = np.random.default_rng(seed)
    a = wedge(scalar_one_form(r), scalar_one_form(r), MUL)
    b = wedge(scalar_one_form(r), scalar_one_form(r), MUL)
    g = MetricField.minkowski()
    x = r.uniform(-0.5, 0.5, N)
    lhs = hodge_star(a * alpha + b * beta, g).at(x)
    rhs = (hodge_star(a, g) * alpha + hodge_star(b, g) * beta).at(x)
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_levi_civita_normalization():
    eps = levi_civita(N)
    assert eps[0, 1, 2, 3] == 1.0
    assert eps[1, 0, 2, 3] == -1.0


def test_wedge_beyond_chart_dimension_raises():
    a = zero_form(3, N)
    b = zero_form(2, N)
    with pytest.raises(DegreeOverflow):
        wedge(a, b)


def test_d_of_top_form_is_canonical_zero():
    top = zero_form(4, N)
    d = exterior_derivative(top)
    assert d.is_zero


def test_adding_mismatched_forms_raises():
    with pytest.raises(ShapeMismatch):
        zero_form(1, N) + zero_form(2, N)


def test_matrix_wedge_order_matters(rng):
    a, b = matrix_one_form(rng), matrix_one_form(rng)
    x = rng.uniform(-0.5, 0.5, N)
    ab, ba = wedge(a, b, MATMUL).at(x), wedge(b, a, MATMUL).at(x)
    assert np.max(np.abs(ab - ba)) > 1e-3
