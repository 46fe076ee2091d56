"""Meshes, open knot vectors and maximal-regularity B-spline spaces on [0, T].

Basis functions are indexed from 0.  Evaluation uses the local nonzero-span
algorithm, so only ``degree + 1`` functions are computed per point; at the
right endpoint the last span is used (left continuity at ``T``).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .linalg import BandedMatrix, cholesky
from .quadrature import gauss_legendre

ERROR_QUAD_POINTS = 12


@dataclass(frozen=True, eq=False)
class Mesh:
    """Strictly increasing break points ``0 = t_0 < ... < t_nel = T``."""

    breakpoints: np.ndarray

    def __post_init__(self):
        br = np.array(self.breakpoints, dtype=float)
        if br.ndim != 1 or br.size < 2:
            raise ValueError("a mesh needs at least one element (two break points)")
        if br[0] != 0.0:
            raise ValueError(f"mesh must start at 0, got {br[0]}")
        if not np.all(np.diff(br) > 0):
            raise ValueError("break points must be strictly increasing")
        br.setflags(write=False)
        object.__setattr__(self, "breakpoints", br)

    @classmethod
    def uniform(cls, T: float, nel: int) -> "Mesh":
        if nel < 1:
            raise ValueError(f"number of elements must be >= 1, got {nel}")
        if T <= 0:
            raise ValueError(f"final time must be positive, got {T}")
        return cls(np.linspace(0.0, T, nel + 1))

    @property
    def T(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def nel(self) -> int:
        return self.breakpoints.size - 1

    @property
    def element_lengths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    @property
    def h(self) -> float:
        return float(self.element_lengths.max())

    def is_uniform(self, rtol: float = 1e-12) -> bool:
        hl = self.element_lengths
        return bool(np.all(np.abs(hl - hl.mean()) <= rtol * hl.mean()))

    def __eq__(self, other):
        return isinstance(other, Mesh) and np.array_equal(self.breakpoints, other.breakpoints)

    def __hash__(self):
        return hash(self.breakpoints.tobytes())


@dataclass(frozen=True, eq=False)
class SplineSpace:
    """Span of the B-splines of ``degree`` on an open knot vector over ``mesh``.

    Interior knots are simple, so the space is ``C^{degree-1}`` and has
    dimension ``mesh.nel + degree``.  Degree 1 is the hat-function space.
    """

    mesh: Mesh
    degree: int
    knots: np.ndarray

    @property
    def dim(self) -> int:
        return self.knots.size - self.degree - 1

    @property
    def T(self) -> float:
        return self.mesh.T

    @property
    def regularity(self) -> int:
        return self.degree - 1

    def __eq__(self, other):
        return (
            isinstance(other, SplineSpace)
            and self.degree == other.degree
            and np.array_equal(self.knots, other.knots)
        )

    def __hash__(self):
        return hash((self.degree, self.knots.tobytes()))

    # evaluation ---------------------------------------------------------

    def element_first(self) -> np.ndarray:
        """Index of the first nonzero basis function on every element."""
        return np.arange(self.mesh.nel)

    def basis_at(self, x, nder: int = 0):
        """Spans and all nonzero basis derivatives at the points ``x``.

        Returns ``(first, vals)`` where ``vals[m, k, r]`` is the ``k``-th
        derivative of basis function ``first[m] + r`` at ``x[m]``.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        spans = kernels.find_spans(self.knots, self.degree, x)
        vals = kernels.basis_ders(self.knots, self.degree, x, spans, nder)
        return spans - self.degree, vals

    def quadrature_values(self, npts: int, nder: int = 0):
        """Points, weights and basis derivatives at ``npts`` Gauss points per element.

        Shapes: points/weights ``(nel, npts)``, values ``(nel, npts, nder+1, p+1)``.
        """
        br = self.mesh.breakpoints
        x, w = gauss_legendre(npts).mapped(br[:-1], br[1:])
        nel = self.mesh.nel
        spans = np.repeat(np.arange(nel) + self.degree, npts)
        vals = kernels.basis_ders(self.knots, self.degree, x.ravel(), spans, nder)
        return x, w, vals.reshape(nel, npts, nder + 1, self.degree + 1)

    def evaluate(self, coeffs, x, k: int = 0) -> np.ndarray:
        """``k``-th derivative of ``sum_i coeffs[i] b_i`` at ``x``."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} coefficients, got shape {coeffs.shape}")
        xa = np.asarray(x, dtype=float)
        first, vals = self.basis_at(xa.ravel(), k)
        idx = first[:, None] + np.arange(self.degree + 1)
        out = np.sum(coeffs[idx] * vals[:, k, :], axis=1)
        return out.reshape(xa.shape) if xa.ndim else float(out[0])

    def gram(self, k_test: int = 0, k_trial: int = 0, weight=None, npts=None) -> BandedMatrix:
        """Band matrix ``[G]_{ij} = sum_l c_l <d^k_test b_i, d^k_trial b_j>_{tau_l}``.

        ``weight`` is an optional per-element factor ``c_l``.  The default rule
        has ``degree + 1`` points, exact for the polynomial integrands.
        """
        p = self.degree
        if npts is None:
            npts = max(1, p + 1 - min(k_test, k_trial))
        kmax = max(k_test, k_trial)
        _, w, vals = self.quadrature_values(npts, kmax)
        if weight is not None:
            w = w * np.asarray(weight, dtype=float)[:, None]
        ab = kernels.band_gram(
            vals[:, :, k_test, :], vals[:, :, k_trial, :], w, self.element_first(), self.dim, p
        )
        return BandedMatrix(ab, p, p, (self.dim, self.dim))

    def element_integrals(self) -> np.ndarray:
        """``I[l, r] = integral over element l of basis function l + r``."""
        _, w, vals = self.quadrature_values(self.degree + 1, 0)
        return np.einsum("eq,eqr->er", w, vals[:, :, 0, :])

    def derivative_space(self) -> "SplineSpace":
        """Maximal-regularity space of degree ``p-1`` containing the derivatives."""
        if self.degree == 0:
            raise ValueError("degree-0 space has no derivative space")
        return SplineSpace(self.mesh, self.degree - 1, self.knots[1:-1].copy())


def open_knot_vector(mesh: Mesh, degree: int) -> np.ndarray:
    br = mesh.breakpoints
    return np.concatenate([np.full(degree, br[0]), br, np.full(degree, br[-1])])


def make_maximal_space(mesh: Mesh, degree: int) -> SplineSpace:
    """Spline space of ``degree`` with simple interior knots (``C^{p-1}``)."""
    if not isinstance(mesh, Mesh):
        raise TypeError("mesh must be a Mesh")
    if int(degree) != degree or degree < 0:
        raise ValueError(f"degree must be a nonnegative integer, got {degree!r}")
    knots = open_knot_vector(mesh, int(degree))
    knots.setflags(write=False)
    return SplineSpace(mesh, int(degree), knots)


def eval_basis(space: SplineSpace, j: int, x: float, k: int = 0) -> float:
    """``k``-th derivative of basis function ``j`` (0-based) at ``x``."""
    if not 0 <= j < space.dim:
        raise IndexError(f"basis index {j} out of range [0, {space.dim})")
    if not 0 <= k <= space.degree:
        raise ValueError(f"derivative order must be in [0, {space.degree}], got {k}")
    x = float(x)
    T = space.T
    if not 0.0 <= x <= T:
        raise ValueError(f"x={x} outside [0, {T}]")
    first, vals = space.basis_at([x], k)
    r = j - int(first[0])
    if 0 <= r <= space.degree:
        return float(vals[0, k, r])
    return 0.0


def collocation_matrix(space: SplineSpace, x, k: int = 0) -> np.ndarray:
    """Dense matrix ``[B]_{m, j} = d^k b_j(x_m)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    first, vals = space.basis_at(x, k)
    out = np.zeros((x.size, space.dim))
    rows = np.arange(x.size)[:, None]
    out[rows, first[:, None] + np.arange(space.degree + 1)] = vals[:, k, :]
    return out


def load_vector(space: SplineSpace, f: Callable, npts: int = ERROR_QUAD_POINTS, k: int = 0) -> np.ndarray:
    """``[b]_i = <f, d^k b_i>`` with ``npts`` Gauss points per element."""
    x, w, vals = space.quadrature_values(npts, k)
    loc = np.einsum("eq,eqr->er", w * f(x), vals[:, :, k, :])
    out = np.zeros(space.dim)
    first = space.element_first()
    for r in range(space.degree + 1):
        np.add.at(out, first + r, loc[:, r])
    return out


def l2_project(space: SplineSpace, f: Callable, quad_order: int | None = None) -> np.ndarray:
    """Coefficients of the L2-orthogonal projection of ``f`` onto ``space``."""
    if quad_order is None:
        quad_order = ERROR_QUAD_POINTS
    if quad_order < space.degree + 1:
        raise ValueError(f"quad_order must be >= degree + 1 = {space.degree + 1}")
    mass = space.gram(0, 0)
    rhs = load_vector(space, f, quad_order)
    return cholesky(mass).solve(rhs)


def antiderivative(space: SplineSpace, coeffs) -> tuple[SplineSpace, np.ndarray]:
    """Exact antiderivative vanishing at 0, as coefficients in degree ``p+1``.

    With ``D`` the degree-``p+1`` coefficients and ``c`` those of the
    integrand, ``D_0 = 0`` and ``D_i = D_{i-1} + c_{i-1} (xi_{i+p+1} - xi_i)/(p+1)``
    on the raised knot vector ``xi``.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    up = make_maximal_space(space.mesh, space.degree + 1)
    kv = up.knots
    p1 = up.degree
    i = np.arange(1, up.dim)
    steps = coeffs * (kv[i + p1] - kv[i]) / p1
    return up, np.concatenate([[0.0], np.cumsum(steps)])


def derivative_coeffs(space: SplineSpace, coeffs) -> tuple[SplineSpace, np.ndarray]:
    """Coefficients of the derivative in :meth:`SplineSpace.derivative_space`."""
    coeffs = np.asarray(coeffs, dtype=float)
    down = space.derivative_space()
    kv = space.knots
    p = space.degree
    i = np.arange(1, space.dim)
    return down, p * np.diff(coeffs) / (kv[i + p] - kv[i])


def quasi_interpolant(space: SplineSpace, derivatives: Sequence[Callable], q: int) -> np.ndarray:
    """Coefficients of the commuting projection ``Q_p^q u``.

    ``derivatives[k]`` evaluates the ``k``-th derivative of ``u`` for
    ``k = 0..q``.  For ``q = 0`` this is the L2 projection; otherwise
    ``Q_p^q u = u(0) + int_0^t Q_{p-1}^{q-1} u'``, realized with the exact
    B-spline antiderivative.
    """
    p = space.degree
    if not 0 <= q <= p:
        raise ValueError(f"q must satisfy 0 <= q <= degree={p}, got {q}")
    if len(derivatives) < q + 1:
        raise ValueError(f"need derivatives up to order {q}, got {len(derivatives)} callables")
    if q == 0:
        return l2_project(space, derivatives[0])
    lower = make_maximal_space(space.mesh, p - 1)
    inner = quasi_interpolant(lower, derivatives[1:], q - 1)
    _, coeffs = antiderivative(lower, inner)
    u0 = float(np.asarray(derivatives[0](np.array([0.0])))[0])
    # Partition of unity: adding a constant shifts every coefficient.
    return coeffs + u0


def seminorm(space: SplineSpace, coeffs, k: int, exact: Callable | None = None,
             npts: int = ERROR_QUAD_POINTS) -> float:
    """``|exact - u_h|_{H^k}`` (or ``|u_h|_{H^k}`` when ``exact`` is None)."""
    x, w, vals = space.quadrature_values(npts, k)
    coeffs = np.asarray(coeffs, dtype=float)
    idx = space.element_first()[:, None] + np.arange(space.degree + 1)
    uh = np.einsum("er,eqr->eq", coeffs[idx], vals[:, :, k, :])
    diff = uh if exact is None else exact(x) - uh
    return float(np.sqrt(np.sum(w * diff * diff)))


def function_seminorm(mesh: Mesh, f: Callable, npts: int = ERROR_QUAD_POINTS) -> float:
    """``||f||_{L2}`` by element-wise Gauss quadrature (pass ``f = d^k u``)."""
    br = mesh.breakpoints
    x, w = gauss_legendre(npts).mapped(br[:-1], br[1:])
    fx = f(x)
    return float(np.sqrt(np.sum(w * fx * fx)))
