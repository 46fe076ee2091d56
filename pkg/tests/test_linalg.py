import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, strategies as st

from stlab.linalg import (
    DENSE_CUTOFF,
    BandedMatrix,
    NotPositiveDefiniteError,
    SingularMatrixError,
    cholesky,
    lu_factor,
    lu_solve,
    min_gen_eig,
)


def band_random(rng, n, lower, upper, shift=0.0):
    a = rng.normal(size=(n, n))
    a = np.triu(np.tril(a, upper), -lower) + shift * np.eye(n)
    return a, BandedMatrix.from_dense(a, lower, upper)


def spd_band(rng, n, bw):
    a, _ = band_random(rng, n, bw, bw)
    a = a + a.T
    a += (np.abs(a).sum(axis=1).max() + 1.0) * np.eye(n)
    return a, BandedMatrix.from_dense(a, bw, bw)


# BandedMatrix ---------------------------------------------------------------------


@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 3), st.integers(0, 3), st.integers(0, 2**31))
def test_dense_round_trip(nr, nc, lo, up, seed):
    rng = np.random.default_rng(seed)
    a = np.triu(np.tril(rng.normal(size=(nr, nc)), up), -lo)
    b = BandedMatrix.from_dense(a, lo, up)
    assert np.array_equal(b.to_dense(), a)
    assert np.array_equal(b.T.to_dense(), a.T)


def test_from_dense_detects_bandwidth(rng):
    a, _ = band_random(rng, 8, 2, 1, shift=3.0)
    b = BandedMatrix.from_dense(a)
    assert (b.lower, b.upper) == (2, 1)


@pytest.mark.parametrize("rows,cols", [
    (slice(0, 9), slice(1, 10)),
    (slice(1, 10), slice(0, 9)),
    (slice(2, 7), slice(2, 7)),
    (slice(0, 10), slice(8, 10)),
])
def test_submatrix(rng, rows, cols):
    a, b = band_random(rng, 10, 2, 2)
    sub = b.submatrix(rows, cols)
    assert np.array_equal(sub.to_dense(), a[rows, cols])


def test_petrov_block_bandwidths(rng):
    _, b = band_random(rng, 12, 3, 3)
    sub = b.submatrix(slice(0, 11), slice(1, 12))
    assert (sub.lower, sub.upper) == (4, 2)


def test_arithmetic_and_matvec(rng):
    a, b = band_random(rng, 9, 1, 2)
    c, d = band_random(rng, 9, 2, 0)
    x = rng.normal(size=9)
    assert np.allclose((b + d).to_dense(), a + c)
    assert np.allclose((b - d).to_dense(), a - c)
    assert np.allclose((b * 2.5).to_dense(), 2.5 * a)
    assert np.allclose(b @ x, a @ x)
    assert np.allclose(b @ np.c_[x, x], a @ np.c_[x, x])


def test_symmetry_check(rng):
    s, sb = spd_band(rng, 6, 2)
    assert sb.is_symmetric()
    _, nb = band_random(rng, 6, 2, 2)
    assert not nb.is_symmetric()


def test_bad_storage_rejected():
    with pytest.raises(ValueError):
        BandedMatrix(np.zeros((2, 4)), 1, 1, (4, 4))
    with pytest.raises(ValueError):
        BandedMatrix(np.zeros((1, 4)), -1, 1, (4, 4))


# LU -----------------------------------------------------------------------------


def test_identity():
    b = np.arange(5.0)
    assert np.array_equal(lu_solve(np.eye(5), b), b)


def test_two_by_two():
    x = lu_solve(BandedMatrix.from_dense([[2.0, 1.0], [1.0, 2.0]]), [3.0, 3.0])
    assert np.allclose(x, [1.0, 1.0])


@pytest.mark.parametrize("n", [5, DENSE_CUTOFF - 1, DENSE_CUTOFF, 200])
def test_random_band_residual(rng, n):
    a, b = spd_band(rng, n, 3)
    rhs = rng.normal(size=n)
    x = lu_solve(b, rhs)
    assert np.linalg.norm(a @ x - rhs) <= 1e-10 * np.linalg.norm(rhs)


@pytest.mark.parametrize("n", [10, 100])
def test_nonsymmetric_and_transposed(rng, n):
    a, b = band_random(rng, n, 3, 1, shift=6.0)
    f = lu_factor(b)
    rhs = rng.normal(size=n)
    assert np.allclose(a @ f.solve(rhs), rhs, atol=1e-12)
    assert np.allclose(a.T @ f.solve(rhs, trans=True), rhs, atol=1e-12)
    assert f.banded == (n >= DENSE_CUTOFF)


@pytest.mark.parametrize("n", [4, 64])
def test_singular_reports_pivot(n):
    a = np.diag(np.ones(n))
    a[n // 2, n // 2] = 0.0
    with pytest.raises(SingularMatrixError) as info:
        lu_solve(BandedMatrix.from_dense(a, 1, 1), np.ones(n))
    assert info.value.pivot == 0.0


def test_relative_pivot_tolerance():
    a = np.diag([1.0, 1.0, 1e-17])
    x = lu_solve(a, np.ones(3))
    assert x[-1] == pytest.approx(1e17)
    with pytest.raises(SingularMatrixError):
        lu_solve(a, np.ones(3), pivot_tol=1e-15)
    assert lu_factor(a).pivot_ratio == pytest.approx(1e-17)


def test_non_square_rejected():
    with pytest.raises(ValueError):
        lu_solve(np.zeros((2, 3)), np.zeros(2))


# Cholesky -------------------------------------------------------------------------


@pytest.mark.parametrize("n,bw", [(1, 0), (7, 1), (50, 3)])
def test_cholesky_reproduces(rng, n, bw):
    a, b = spd_band(rng, n, bw)
    f = cholesky(b)
    l = f.to_banded().to_dense()
    assert np.allclose(l @ l.T, a, rtol=1e-12, atol=1e-12 * np.abs(a).max())
    rhs = rng.normal(size=n)
    assert np.allclose(a @ f.solve(rhs), rhs, atol=1e-12)
    assert np.allclose(l @ f.solve_lower(rhs), rhs, atol=1e-12)
    assert np.allclose(l.T @ f.solve_lower(rhs, trans=True), rhs, atol=1e-12)


def test_cholesky_rejects_indefinite():
    with pytest.raises(NotPositiveDefiniteError):
        cholesky(BandedMatrix.from_dense(np.diag([1.0, -1.0, 2.0]), 0, 0))


def test_cholesky_rejects_nonsymmetric():
    with pytest.raises(NotPositiveDefiniteError):
        cholesky(BandedMatrix.from_dense([[2.0, 1.0], [0.0, 2.0]], 1, 1))


# generalized eigenproblem ------------------------------------------------------------


def test_k_equals_m():
    m = np.diag([1.0, 2.0, 3.0]) + 0.1
    lam, _ = min_gen_eig(m, m)
    assert lam == pytest.approx(1.0, rel=1e-13)


def test_k_zero():
    lam, _ = min_gen_eig(np.zeros((4, 4)), np.eye(4))
    assert lam == 0.0


def _narrow_pencil(rng, n=5):
    # M random SPD, K = M^{1/2} D M^{1/2} with spectrum in [1, 1.3].
    g = rng.normal(size=(n, n))
    m = g @ g.T + n * np.eye(n)
    w, v = np.linalg.eigh(m)
    half = v @ np.diag(np.sqrt(w)) @ v.T
    d = np.diag(np.linspace(1.0, 1.3, n))
    return half @ d @ half, m


def test_small_instance_against_oracles(rng):
    k, m = _narrow_pencil(rng)
    lam, x = min_gen_eig(k, m)
    full = sla.eigh(k, m, eigvals_only=True)
    assert lam == pytest.approx(full[0], rel=1e-10)
    assert x @ m @ x == pytest.approx(1.0, rel=1e-10)
    assert np.allclose(k @ x, lam * m @ x, atol=1e-9)
    # brute force Rayleigh quotient sampling
    z = rng.normal(size=(1_000_000, 5))
    rq = np.einsum("ij,jk,ik->i", z, k, z) / np.einsum("ij,jk,ik->i", z, m, z)
    assert rq.min() == pytest.approx(lam, abs=1e-3)
    assert rq.min() >= lam - 1e-10


def test_rayleigh_lower_bound_and_scaling(rng):
    g = rng.normal(size=(8, 8))
    k = g @ g.T
    h = rng.normal(size=(8, 8))
    m = h @ h.T + 8 * np.eye(8)
    lam, _ = min_gen_eig(k, m)
    for x in rng.normal(size=(1000, 8)):
        assert (x @ k @ x) / (x @ m @ x) >= lam - 1e-10
    lam3, _ = min_gen_eig(3.0 * k, m)
    assert lam3 == pytest.approx(3.0 * lam, rel=1e-12)


def test_clamps_tiny_negative():
    k = np.diag([-1e-15, 1.0])
    lam, _ = min_gen_eig(k, np.eye(2))
    assert lam == 0.0


def test_rejects_indefinite_pencil():
    with pytest.raises(np.linalg.LinAlgError):
        min_gen_eig(np.diag([-1.0, 1.0]), np.eye(2))


def test_rejects_bad_mass():
    with pytest.raises(NotPositiveDefiniteError):
        min_gen_eig(np.eye(2), np.diag([1.0, -1.0]))
