import numpy as np
import pytest
from hypothesis import given, strategies as st

from twistgauge.errors import DomainError, UnsupportedOrder
from twistgauge.jets import Coords, FieldHandle, Jet, fd_oracle, jexp, jlog, jsqrt, lift, reciprocal
from twistgauge.samples import random_polynomial

seeds = st.integers(0, 2**32 - 1)


def test_square_second_order():
    f = FieldHandle(lambda X: X[0] ** 2, 1)
    J = lift(f, [3.0], 2)
    assert J.value == pytest.approx(9.0)
    assert J.partial((0,)) == pytest.approx(6.0)
    assert J.partial((0, 0)) == pytest.approx(2.0)


def test_exp_times_variable_first_order():
    f = FieldHandle(lambda X: jexp(X[0]) * X[1], 2)
    J = lift(f, [0.0, 1.0], 1)
    assert J.value == pytest.approx(1.0)
    assert J.partial((0,)) == pytest.approx(1.0)
    assert J.partial((1,)) == pytest.approx(1.0)


def test_fd_oracle_cube_and_constant():
    cube = FieldHandle(lambda X: X[0] ** 3, 1)
    assert fd_oracle(cube, [1.0], (0, 0)) == pytest.approx(6.0, abs=1e-6)
    const = FieldHandle(lambda X: X.const(np.array(2.5)), 2)
    for mi in [(0,), (0, 1), (1, 1, 0)]:
        assert fd_oracle(const, [0.3, -0.2], mi) == pytest.approx(0.0, abs=1e-9)


def test_degree_five_polynomial_against_finite_differences(rng):
    f = random_polynomial(rng, 3, (), degree=5, terms=8, scale=0.5)
    x = rng.uniform(-0.5, 0.5, 3)
    J = lift(f, x, 3)
    for mi in [(0,), (2,), (0, 1), (2, 2)]:
        exact = J.partial(mi)
        assert abs(exact - fd_oracle(f, x, mi)) <= 1e-6 * max(1.0, abs(exact))
    for mi in [(0, 1, 2), (1, 1, 1)]:
        exact = J.partial(mi)
        assert abs(exact - fd_oracle(f, x, mi)) <= 1e-4 * max(1.0, abs(exact))


def test_order_above_three_is_unsupported():
    f = FieldHandle(lambda X: X[0], 1)
    with pytest.raises(UnsupportedOrder):
        lift(f, [0.0], 4)
    with pytest.raises(UnsupportedOrder):
        fd_oracle(f, [0.0], (0, 0, 0, 0))


def test_log_of_nonpositive_is_a_domain_error():
    f = FieldHandle(lambda X: jlog(X[0]), 1)
    with pytest.raises(DomainError):
        lift(f, [-1.0], 1)


@given(seeds)
def test_product_rule_is_exact(seed):
    r = np.random.default_rng(seed)
    f, g = random_polynomial(r, 3, (), 3, 4), random_polynomial(r, 3, (), 3, 4)
    x = r.uniform(-0.5, 0.5, 3)
    Jf, Jg = lift(f, x, 3), lift(g, x, 3)
    Jp = Jf * Jg
    # Leibniz for the mixed third partial, written out
    i, j, k = 0, 1, 2
    expect = 0.0
    for S in [(), (i,), (j,), (k,), (i, j), (i, k), (j, k), (i, j, k)]:
        rest = tuple(m for m in (i, j, k) if m not in S)
        expect += Jf.partial(S) * Jg.partial(rest) if S else Jf.value * Jg.partial(rest)
    assert Jp.partial((i, j, k)) == pytest.approx(expect, rel=1e-12, abs=1e-12)


@given(seeds)
def test_exp_of_sum_is_product_of_exps(seed):
    r = np.random.default_rng(seed)
    f, g = random_polynomial(r, 2, (), 2, 3), random_polynomial(r, 2, (), 2, 3)
    X = Coords(r.uniform(-0.5, 0.5, 2), 3)
    a, b = f(X), g(X)
    lhs, rhs = jexp(a + b), jexp(a) * jexp(b)
    for p, q in zip(lhs.parts, rhs.parts):
        np.testing.assert_allclose(p, q, rtol=1e-12, atol=1e-12)


@given(seeds)
def test_reciprocal_and_sqrt_round_trips(seed):
    r = np.random.default_rng(seed)
    f = random_polynomial(r, 3, (), 2, 3, 0.2)
    X = Coords(r.uniform(-0.5, 0.5, 3), 3)
    u = jexp(f(X))
    one = u * reciprocal(u)
    s = jsqrt(u)
    np.testing.assert_allclose(one.parts[0], 1.0, atol=1e-12)
    for p in one.parts[1:]:
        np.testing.assert_allclose(p, 0.0, atol=1e-12)
    for p, q in zip((s * s).parts, u.parts):
        np.testing.assert_allclose(p, q, atol=1e-12)


@given(seeds)
def test_schwarz_symmetry_is_bitwise(seed):
    r = np.random.default_rng(seed)
    f = random_polynomial(r, 4, (), 4, 6)
    J = lift(FieldHandle(lambda X: jexp(f(X)), 4), r.uniform(-0.5, 0.5, 4), 3)
    assert np.array_equal(J.parts[2], J.parts[2].T)
    for perm in [(1, 0, 2), (2, 1, 0), (0, 2, 1)]:
        assert np.array_equal(J.parts[3], J.parts[3].transpose(perm))


def test_jet_shape_validation():
    from twistgauge.errors import ShapeMismatch

    with pytest.raises(ShapeMismatch):
        Jet([np.zeros(2), np.zeros((3, 2))], 2)
