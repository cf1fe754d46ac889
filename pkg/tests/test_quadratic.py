import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from peakbench.errors import NotPositiveDefiniteError
from peakbench.quadratic import (
    QuadraticForm,
    add,
    condition_number,
    evaluate,
    gradient,
    interpolate,
    interpolate_optimum,
)

from conftest import random_quadratic, random_spd, sphere


def test_evaluate_examples():
    assert evaluate(sphere([0, 0]), [2, 0]) == 2.0
    assert evaluate(QuadraticForm(np.eye(2), [1, 1], 3.0), [1, 1]) == 3.0
    assert evaluate(QuadraticForm(np.diag([1.0, 100.0]), [0, 0], 0.0), [0, 1]) == 50.0


def test_evaluate_dimension_mismatch():
    with pytest.raises(ValueError):
        evaluate(sphere([0, 0]), [1, 2, 3])
    with pytest.raises(ValueError):
        gradient(sphere([0, 0]), [1])


def test_gradient_examples():
    np.testing.assert_array_equal(gradient(sphere([0, 0]), [2, 0]), [2, 0])
    np.testing.assert_array_equal(
        gradient(QuadraticForm(np.diag([1.0, 100.0]), [0, 0], 0.0), [1, 1]), [1, 100])
    q = QuadraticForm(np.diag([3.0, 5.0]), [0.3, -1.2], 7.0)
    np.testing.assert_array_equal(gradient(q, q.optimum_x), [0.0, 0.0])


def test_gradient_matches_finite_differences(rng):
    for _ in range(50):
        d = int(rng.integers(2, 6))
        q = random_quadratic(rng, d)
        x = rng.uniform(-3, 3, d)
        g = gradient(q, x)
        h = 1e-6
        fd = np.array([(evaluate(q, x + h * e) - evaluate(q, x - h * e)) / (2 * h)
                       for e in np.eye(d)])
        assert np.linalg.norm(fd - g) <= 1e-6 * max(1.0, np.linalg.norm(g))


def test_constructor_rejects_asymmetric_and_indefinite():
    with pytest.raises(ValueError):
        QuadraticForm(np.array([[1.0, 0.5], [0.0, 1.0]]), [0, 0], 0.0)
    with pytest.raises(NotPositiveDefiniteError):
        QuadraticForm(np.diag([1.0, -1.0]), [0, 0], 0.0)
    with pytest.raises(ValueError):
        QuadraticForm(np.zeros((0, 0)), [], 0.0)


def test_constructor_symmetrizes_tiny_asymmetry():
    H = np.array([[2.0, 1.0], [1.0 + 1e-14, 2.0]])
    q = QuadraticForm(H, [0, 0], 0.0)
    assert np.array_equal(q.hessian, q.hessian.T)


def test_interpolate_optimum_examples():
    q1, q2 = sphere([0, 0]), sphere([2, 0])
    np.testing.assert_allclose(interpolate_optimum(q1, q2, 0.5), [1, 0], atol=1e-15)
    np.testing.assert_array_equal(interpolate_optimum(q1, q2, 0.0), q1.optimum_x)
    a = QuadraticForm(np.diag([1.0, 4.0]), [0, 0], 0.0)
    b = QuadraticForm(np.diag([4.0, 1.0]), [1, 1], 0.0)
    np.testing.assert_allclose(interpolate_optimum(a, b, 0.5), [0.8, 0.2], rtol=1e-14)


def test_interpolate_endpoints_and_sphere_example():
    q1, q2 = sphere([0, 0]), sphere([2, 0])
    assert interpolate(q1, q2, 0.0).same_as(q1)
    assert interpolate(q1, q2, 1.0).same_as(q2)
    mid = interpolate(q1, q2, 0.5)
    np.testing.assert_allclose(mid.hessian, np.eye(2))
    np.testing.assert_allclose(mid.optimum_x, [1, 0], atol=1e-15)
    # each half-weighted sphere contributes 1/2 * (1/2 * 1^2)
    assert mid.optimum_value == pytest.approx(0.5, rel=1e-15)


def test_interpolate_rejects_t_outside_unit_interval():
    with pytest.raises(ValueError):
        interpolate_optimum(sphere([0, 0]), sphere([1, 0]), 1.5)


def test_add_examples():
    q = add(sphere([0, 0]), sphere([2, 0]))
    np.testing.assert_allclose(q.hessian, 2 * np.eye(2))
    np.testing.assert_allclose(q.optimum_x, [1, 0], atol=1e-15)
    # both spheres give 1/2 * 1^2 at the midpoint
    assert q.optimum_value == pytest.approx(1.0, rel=1e-15)
    base = QuadraticForm(np.diag([2.0, 3.0]), [0.5, -0.5], 1.25)
    doubled = add(base, QuadraticForm(base.hessian, base.optimum_x, base.optimum_value))
    np.testing.assert_array_equal(doubled.hessian, 2 * base.hessian)
    np.testing.assert_array_equal(doubled.optimum_x, base.optimum_x)
    assert doubled.optimum_value == 2.5


def test_add_equals_twice_midpoint_interpolation(rng):
    q1, q2 = random_quadratic(rng, 3, 0.5), random_quadratic(rng, 3, -0.25)
    s, m = add(q1, q2), interpolate(q1, q2, 0.5)
    for x in rng.uniform(-5, 5, (100, 3)):
        assert evaluate(s, x) == pytest.approx(2 * evaluate(m, x), rel=1e-12)


def test_add_dimension_mismatch():
    with pytest.raises(ValueError):
        add(sphere([0, 0]), sphere([0, 0, 0]))


def test_condition_number_examples(rng):
    assert condition_number(np.eye(4)) == 1.0
    assert condition_number(np.diag([1.0, 100.0])) == pytest.approx(100.0, rel=1e-14)
    R, _ = np.linalg.qr(rng.standard_normal((2, 2)))
    assert condition_number(R.T @ np.diag([1.0, 10.0]) @ R) == pytest.approx(10.0, rel=1e-9)
    with pytest.raises(NotPositiveDefiniteError):
        condition_number(np.diag([1.0, -2.0]))


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=1000, deadline=None)
@given(seed=seeds, d=st.sampled_from([2, 3, 5]), t=st.floats(0, 1))
def test_gradient_vanishes_at_interpolation_optimum(seed, d, t):
    rng = np.random.default_rng(seed)
    q1, q2 = random_quadratic(rng, d), random_quadratic(rng, d)
    x = interpolate_optimum(q1, q2, t)
    Ht = (1 - t) * q1.hessian + t * q2.hessian
    tol = 1e-8 * (1 + np.linalg.norm(x) * np.linalg.norm(Ht, 2))
    g = (1 - t) * gradient(q1, x) + t * gradient(q2, x)
    assert np.linalg.norm(g) <= tol
    h = 1e-6

    def ft(z):
        return (1 - t) * evaluate(q1, z) + t * evaluate(q2, z)

    fd = np.array([(ft(x + h * e) - ft(x - h * e)) / (2 * h) for e in np.eye(d)])
    # finite differences carry O(h^2 |f'''|) = 0 plus rounding of order eps*|f|/h
    scale = max(1.0, abs(ft(x)))
    assert np.linalg.norm(fd) <= 1e-6 * scale * np.linalg.norm(Ht, 2) + tol


@settings(max_examples=200, deadline=None)
@given(seed=seeds, d=st.sampled_from([2, 3, 5]), t=st.floats(0, 1))
def test_pointwise_interpolation_identity(seed, d, t):
    rng = np.random.default_rng(seed)
    q1, q2 = random_quadratic(rng, d, 0.3), random_quadratic(rng, d, 1.7)
    qt = interpolate(q1, q2, t)
    for x in rng.uniform(-5, 5, (5, d)):
        expected = (1 - t) * evaluate(q1, x) + t * evaluate(q2, x)
        assert evaluate(qt, x) == pytest.approx(expected, rel=1e-12, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(seed=seeds, d=st.sampled_from([2, 3, 5]))
def test_addition_identity(seed, d):
    rng = np.random.default_rng(seed)
    q1, q2 = random_quadratic(rng, d, 0.1), random_quadratic(rng, d, 2.0)
    q = add(q1, q2)
    for x in rng.uniform(-5, 5, (5, d)):
        assert evaluate(q, x) == pytest.approx(evaluate(q1, x) + evaluate(q2, x), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(seed=seeds, d=st.sampled_from([2, 3, 5]))
def test_equal_hessians_give_linear_pareto_set(seed, d):
    rng = np.random.default_rng(seed)
    H = random_spd(rng, d)
    q1 = QuadraticForm(H, rng.uniform(-3, 3, d), 0.0)
    q2 = QuadraticForm(H, rng.uniform(-3, 3, d), 0.0)
    pts = np.array([interpolate_optimum(q1, q2, t) for t in np.linspace(0, 1, 11)])
    direction = q2.optimum_x - q1.optimum_x
    direction /= np.linalg.norm(direction)
    rel = pts - q1.optimum_x
    resid = rel - np.outer(rel @ direction, direction)
    assert np.abs(resid).max() <= 1e-10
