import numpy as np
import pytest
from hypothesis import given, strategies as st

from stlab.analysis import ManufacturedSolution
from stlab.quadrature import gauss_legendre
from stlab.splines import (
    Mesh,
    antiderivative,
    collocation_matrix,
    derivative_coeffs,
    eval_basis,
    function_seminorm,
    l2_project,
    make_maximal_space,
    quasi_interpolant,
    seminorm,
)

from conftest import random_mesh

U = ManufacturedSolution(mu=1000.0)


# construction --------------------------------------------------------------


def test_quadratic_two_elements():
    s = make_maximal_space(Mesh([0.0, 5.0, 10.0]), 2)
    assert s.dim == 4
    assert np.array_equal(s.knots, [0, 0, 0, 5, 10, 10, 10])


def test_single_element_hats():
    s = make_maximal_space(Mesh([0.0, 10.0]), 1)
    assert s.dim == 2
    assert eval_basis(s, 0, 2.5) == pytest.approx(0.75)
    assert eval_basis(s, 1, 2.5) == pytest.approx(0.25)


def test_uniform_64_elements():
    s = make_maximal_space(Mesh.uniform(10.0, 64), 2)
    assert s.dim == 66
    assert s.mesh.h == pytest.approx(0.15625)


@pytest.mark.parametrize("nel,p", [(1, 1), (3, 2), (10, 4), (7, 6)])
def test_dim_and_regularity(nel, p):
    s = make_maximal_space(Mesh.uniform(1.0, nel), p)
    assert s.dim == nel + p
    assert s.regularity == p - 1
    assert np.all(s.knots[: p + 1] == 0.0) and np.all(s.knots[-(p + 1):] == 1.0)


@pytest.mark.parametrize("bad", [[0.0], [0.0, 0.0], [0.0, 2.0, 1.0], [1.0, 2.0], [[0.0, 1.0]]])
def test_degenerate_meshes_rejected(bad):
    with pytest.raises(ValueError):
        Mesh(bad)


def test_uniform_rejects_zero_elements():
    with pytest.raises(ValueError):
        Mesh.uniform(1.0, 0)


def test_negative_degree_rejected():
    with pytest.raises(ValueError):
        make_maximal_space(Mesh.uniform(1.0, 2), -1)


def test_equality_and_hash():
    a = make_maximal_space(Mesh.uniform(1.0, 4), 2)
    b = make_maximal_space(Mesh.uniform(1.0, 4), 2)
    assert a == b and hash(a) == hash(b)
    assert a != make_maximal_space(Mesh.uniform(1.0, 4), 3)


# basis evaluation ------------------------------------------------------------


def test_degree_zero_is_indicator():
    s = make_maximal_space(Mesh.uniform(4.0, 4), 0)
    assert eval_basis(s, 1, 1.0) == 1.0
    assert eval_basis(s, 1, 1.5) == 1.0
    assert eval_basis(s, 1, 2.0) == 0.0
    assert eval_basis(s, 1, 0.5) == 0.0
    # left continuity at T
    assert eval_basis(s, 3, 4.0) == 1.0


def test_quadratic_midpoint_value():
    s = make_maximal_space(Mesh.uniform(6.0, 6), 2)
    # basis 2 has knots {0, 1, 2, 3}
    assert eval_basis(s, 2, 1.5) == pytest.approx(0.75, abs=1e-15)


def test_endpoint_interpolation():
    s = make_maximal_space(Mesh.uniform(3.0, 5), 3)
    assert eval_basis(s, 0, 0.0) == 1.0
    assert eval_basis(s, s.dim - 1, 3.0) == 1.0


@pytest.mark.parametrize("j,x,k", [(-1, 0.5, 0), (6, 0.5, 0), (0, -0.1, 0), (0, 2.1, 0), (0, 0.5, 3)])
def test_eval_basis_rejects(j, x, k):
    s = make_maximal_space(Mesh.uniform(2.0, 4), 2)
    with pytest.raises((IndexError, ValueError)):
        eval_basis(s, j, x, k)


@pytest.mark.parametrize("p", range(0, 7))
def test_partition_of_unity_at_quadrature_nodes(rng, p):
    s = make_maximal_space(random_mesh(rng, 9), p)
    x, _, _ = s.quadrature_values(p + 3)
    b = collocation_matrix(s, x.ravel())
    assert np.max(np.abs(b.sum(axis=1) - 1.0)) < 1e-12


def test_partition_of_unity_random_points(rng):
    s = make_maximal_space(Mesh.uniform(10.0, 13), 3)
    x = rng.uniform(0, 10, 100)
    total = [sum(eval_basis(s, j, xi) for j in range(s.dim)) for xi in x]
    assert np.allclose(total, 1.0, atol=1e-12)


@given(st.integers(1, 6), st.integers(1, 12), st.integers(0, 2**31))
def test_nonnegative_and_local_support(p, nel, seed):
    rng = np.random.default_rng(seed)
    s = make_maximal_space(random_mesh(rng, nel), p)
    x = np.concatenate([rng.uniform(0, s.T, 60), s.mesh.breakpoints])
    b = collocation_matrix(s, x)
    assert b.min() >= -1e-14
    kv = s.knots
    for j in range(s.dim):
        outside = (x < kv[j]) | (x > kv[j + p + 1])
        assert np.all(b[outside, j] == 0.0)
        mid = 0.5 * (kv[j] + kv[j + p + 1])
        assert eval_basis(s, j, mid) > 0.0


@pytest.mark.parametrize("p", [1, 2, 3, 5])
def test_derivative_matches_finite_differences(rng, p):
    s = make_maximal_space(Mesh.uniform(1.0, 5), p)
    eps = 1e-6
    for x in rng.uniform(0.01, 0.99, 20):
        if np.min(np.abs(x - s.mesh.breakpoints)) < 10 * eps:
            continue
        for j in range(s.dim):
            d = eval_basis(s, j, x, 1)
            fd = (eval_basis(s, j, x + eps) - eval_basis(s, j, x - eps)) / (2 * eps)
            assert d == pytest.approx(fd, rel=1e-6, abs=1e-7)


def test_derivative_coefficients(rng):
    s = make_maximal_space(random_mesh(rng, 6), 3)
    c = rng.normal(size=s.dim)
    ds, dc = derivative_coeffs(s, c)
    x = rng.uniform(0, s.T, 30)
    assert np.allclose(ds.evaluate(dc, x), s.evaluate(c, x, 1), atol=1e-12)


@pytest.mark.parametrize("p", [0, 1, 2, 4])
def test_antiderivative_is_exact(rng, p):
    s = make_maximal_space(random_mesh(rng, 7), p)
    c = rng.normal(size=s.dim)
    up, d = antiderivative(s, c)
    assert d[0] == 0.0
    x = np.linspace(0, s.T, 25)
    assert np.allclose(up.evaluate(d, x, 1), s.evaluate(c, x), atol=1e-12)
    # value at T equals the integral
    _, w, vals = s.quadrature_values(p + 1)
    idx = np.arange(s.mesh.nel)[:, None] + np.arange(p + 1)
    integral = np.sum(w * np.einsum("er,eqr->eq", c[idx], vals[:, :, 0, :]))
    assert up.evaluate(d, s.T) == pytest.approx(integral, rel=1e-12)


# projections -------------------------------------------------------------------


def test_l2_project_constant():
    s = make_maximal_space(Mesh.uniform(3.0, 7), 3)
    c = l2_project(s, lambda t: np.ones_like(t))
    assert np.allclose(c, 1.0, atol=1e-13)


@pytest.mark.parametrize("p", [0, 1, 2, 3])
def test_l2_project_reproduces_space(rng, p):
    s = make_maximal_space(random_mesh(rng, 8), p)
    c = rng.normal(size=s.dim)
    got = l2_project(s, lambda t: s.evaluate(c, t))
    assert np.allclose(got, c, atol=1e-12)


def test_l2_project_rejects_low_quadrature():
    s = make_maximal_space(Mesh.uniform(1.0, 3), 2)
    with pytest.raises(ValueError):
        l2_project(s, np.sin, quad_order=2)


def test_l2_projection_bound():
    mesh = Mesh.uniform(10.0, 128)
    s = make_maximal_space(mesh, 2)
    c = l2_project(s, U.u)
    err = seminorm(s, c, 0, U.u)
    bound = (mesh.h / np.pi) ** 3 * function_seminorm(mesh, U.derivative(3))
    assert err <= bound


def test_l2_projection_is_orthogonal(rng):
    s = make_maximal_space(Mesh.uniform(2.0, 6), 2)
    c = l2_project(s, np.exp)
    x, w, vals = s.quadrature_values(12)
    idx = np.arange(6)[:, None] + np.arange(3)
    resid = np.exp(x) - np.einsum("er,eqr->eq", c[idx], vals[:, :, 0, :])
    for j in range(s.dim):
        bj = np.zeros(s.dim)
        bj[j] = 1.0
        assert abs(np.sum(w * resid * np.einsum("er,eqr->eq", bj[idx], vals[:, :, 0, :]))) < 1e-13


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_quasi_interpolant_projection_property(rng, p):
    s = make_maximal_space(random_mesh(rng, 6), p)
    c = rng.normal(size=s.dim)
    derivs = [lambda t, k=k: s.evaluate(c, t, k) for k in range(p + 1)]
    for q in range(1, p + 1):
        assert np.allclose(quasi_interpolant(s, derivs, q), c, atol=1e-10)


@pytest.mark.parametrize("q", [1, 2])
def test_quasi_interpolant_keeps_zero_initial_value(q):
    s = make_maximal_space(Mesh.uniform(10.0, 32), 2)
    c = quasi_interpolant(s, U.derivatives(q), q)
    assert c[0] == 0.0
    assert s.evaluate(c, 0.0) == 0.0


def test_quasi_interpolant_bound_quadratic():
    mesh = Mesh.uniform(10.0, 256)
    s = make_maximal_space(mesh, 2)
    c = quasi_interpolant(s, U.derivatives(1), 1)
    err = seminorm(s, c, 1, U.derivative(1))
    assert err <= (mesh.h / np.pi) ** 2 * function_seminorm(mesh, U.derivative(3))


def test_quasi_interpolant_rejects_large_q():
    s = make_maximal_space(Mesh.uniform(1.0, 3), 2)
    with pytest.raises(ValueError):
        quasi_interpolant(s, U.derivatives(3), 3)


def test_quasi_interpolant_needs_derivatives():
    s = make_maximal_space(Mesh.uniform(1.0, 3), 2)
    with pytest.raises(ValueError):
        quasi_interpolant(s, U.derivatives(0), 1)


def test_quadrature_values_shapes():
    s = make_maximal_space(Mesh.uniform(1.0, 5), 3)
    x, w, v = s.quadrature_values(4, 2)
    assert x.shape == w.shape == (5, 4)
    assert v.shape == (5, 4, 3, 4)
    assert np.allclose(w.sum(), 1.0)
    assert gauss_legendre(4).order == 4
