import numpy as np
import pytest
from hypothesis import given, strategies as st

from stlab.quadrature import MAX_POINTS, gauss_legendre, integrate_mesh
from stlab.splines import Mesh


@pytest.mark.parametrize("n", [1, 2, 3, 5, 12, 16, 40, MAX_POINTS])
def test_nodes_symmetric_and_weights_sum(n):
    rule = gauss_legendre(n)
    assert np.all(np.diff(rule.nodes) > 0)
    assert np.allclose(rule.nodes, -rule.nodes[::-1], atol=2e-15)
    assert np.all(rule.weights > 0)
    assert rule.weights.sum() == pytest.approx(2.0, abs=1e-13)


def test_two_point_rule():
    rule = gauss_legendre(2)
    assert np.allclose(rule.nodes, [-1 / np.sqrt(3), 1 / np.sqrt(3)])
    assert np.allclose(rule.weights, [1.0, 1.0])


@pytest.mark.parametrize("n", [1, 3, 6, 12])
def test_exact_for_degree_2n_minus_1(n):
    rule = gauss_legendre(n)
    for k in range(2 * n):
        exact = (1.0 - (-1.0) ** (k + 1)) / (k + 1)
        assert np.sum(rule.weights * rule.nodes**k) == pytest.approx(exact, abs=1e-14)


def test_not_exact_beyond_order():
    rule = gauss_legendre(2)
    assert abs(np.sum(rule.weights * rule.nodes**4) - 0.4) > 1e-3


@pytest.mark.parametrize("n", [0, -1, MAX_POINTS + 1, 2.5])
def test_rejects_bad_counts(n):
    with pytest.raises(ValueError):
        gauss_legendre(n)


def test_rule_is_immutable():
    rule = gauss_legendre(4)
    with pytest.raises(ValueError):
        rule.nodes[0] = 0.0


def test_mapped_shapes_and_lengths():
    x, w = gauss_legendre(3).mapped(np.array([0.0, 1.0]), np.array([1.0, 3.0]))
    assert x.shape == w.shape == (2, 3)
    assert np.allclose(w.sum(axis=1), [1.0, 2.0])
    assert np.all((x[0] > 0) & (x[0] < 1)) and np.all((x[1] > 1) & (x[1] < 3))


@given(st.lists(st.floats(0.1, 2.0), min_size=1, max_size=8), st.integers(1, 6))
def test_integrate_mesh_polynomials(lengths, n):
    mesh = Mesh(np.concatenate([[0.0], np.cumsum(lengths)]))
    T = mesh.T
    k = 2 * n - 1
    got = integrate_mesh(mesh, gauss_legendre(n), lambda t: t**k)
    assert got == pytest.approx(T ** (k + 1) / (k + 1), rel=1e-12)


def test_integrate_smooth_function():
    mesh = Mesh.uniform(np.pi, 16)
    assert integrate_mesh(mesh, gauss_legendre(12), np.sin) == pytest.approx(2.0, abs=1e-14)
