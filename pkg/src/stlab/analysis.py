"""Discrete solves, error measurement, inf-sup estimation and rate fitting."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

import numpy as np
import scipy.linalg as sla
from numpy.polynomial import Polynomial
from scipy.sparse.linalg import LinearOperator, svds

from .assembly import AssembledSystem, FormSpec, assemble_system
from .linalg import SingularMatrixError, cholesky, lu_factor, min_gen_eig
from .spaces import ReducedSpace
from .splines import ERROR_QUAD_POINTS, function_seminorm, load_vector, seminorm

OMEGA_DEFAULT = 5.0 * math.pi / 4.0
# Above this dimension inf-sup estimates use the iterative route by default.
DENSE_BETA_MAX = 1024


class ExactSolution(Protocol):
    mu: float

    def derivative(self, k: int) -> Callable: ...

    def f(self, t): ...


@dataclass(frozen=True)
class ManufacturedSolution:
    """``u(t) = sin^2(omega t)`` with forcing ``f = u'' + mu u``.

    ``u(0) = u'(0) = 0``.  For ``k >= 1`` the derivatives are
    ``-(2 omega)^k cos(2 omega t + k pi/2) / 2``.
    """

    mu: float
    omega: float = OMEGA_DEFAULT

    def u(self, t):
        return np.sin(self.omega * np.asarray(t, dtype=float)) ** 2

    def derivative(self, k: int) -> Callable:
        if k < 0:
            raise ValueError("derivative order must be nonnegative")
        if k == 0:
            return self.u
        w2 = 2.0 * self.omega
        c = -0.5 * w2**k
        return lambda t: c * np.cos(w2 * np.asarray(t, dtype=float) + 0.5 * k * math.pi)

    def f(self, t):
        t = np.asarray(t, dtype=float)
        return 2.0 * self.omega**2 * np.cos(2.0 * self.omega * t) + self.mu * self.u(t)

    def derivatives(self, q: int) -> list[Callable]:
        return [self.derivative(k) for k in range(q + 1)]


@dataclass(frozen=True)
class PolynomialSolution:
    """Polynomial exact solution, used to check exact reproduction."""

    coef: tuple
    mu: float

    @property
    def poly(self) -> Polynomial:
        return Polynomial(self.coef)

    def u(self, t):
        return self.poly(np.asarray(t, dtype=float))

    def derivative(self, k: int) -> Callable:
        d = self.poly.deriv(k) if k else self.poly
        return lambda t: d(np.asarray(t, dtype=float))

    def f(self, t):
        return self.derivative(2)(t) + self.mu * self.u(t)

    def derivatives(self, q: int) -> list[Callable]:
        return [self.derivative(k) for k in range(q + 1)]


@dataclass(frozen=True)
class ErrorReport:
    """Errors of a discrete solution.

    ``u_h1`` and ``u_l2`` are the norms of the exact solution, so relative
    errors are available as :attr:`rel_h1` and :attr:`rel_l2`.
    """

    h: float
    h1_semi: float
    l2: float
    best_h1: float
    u_h1: float = 1.0
    u_l2: float = 1.0

    @property
    def rel_h1(self) -> float:
        return self.h1_semi / self.u_h1

    @property
    def rel_l2(self) -> float:
        return self.l2 / self.u_l2

    @property
    def rel_best_h1(self) -> float:
        return self.best_h1 / self.u_h1


def solve(trial: ReducedSpace, test: ReducedSpace, form: FormSpec, f: Callable,
          quad_order: int = ERROR_QUAD_POINTS) -> np.ndarray:
    """Trial coefficients of the Petrov-Galerkin solution.

    Raises
    ------
    SingularMatrixError
        If the system is singular to working precision; the exception
        carries the offending pivot magnitude.
    """
    sys = assemble_system(trial, test, form, f, quad_order)
    return lu_factor(sys.A).solve(sys.rhs)


def best_approx_h1(trial: ReducedSpace, exact: ExactSolution,
                   quad_order: int = ERROR_QUAD_POINTS) -> tuple[np.ndarray, float]:
    """H1-seminorm projection of ``exact`` onto the trial space and its error."""
    du = exact.derivative(1)
    parent = trial.parent
    rhs = load_vector(parent, du, quad_order, k=1)[trial.index_map]
    h1 = parent.gram(1, 1).submatrix(
        slice(trial.offset, trial.offset + trial.dim), slice(trial.offset, trial.offset + trial.dim)
    )
    c = cholesky(h1).solve(rhs)
    return c, seminorm(parent, trial.embed(c), 1, du, quad_order)


def error_norms(space: ReducedSpace, coeffs, exact: ExactSolution, best: bool = True,
                quad_order: int = ERROR_QUAD_POINTS) -> ErrorReport:
    """H1-seminorm and L2 errors with ``quad_order`` Gauss points per element."""
    parent = space.parent
    full = space.embed(coeffs)
    e1 = seminorm(parent, full, 1, exact.derivative(1), quad_order)
    e0 = seminorm(parent, full, 0, exact.derivative(0), quad_order)
    b1 = best_approx_h1(space, exact, quad_order)[1] if best else float("nan")
    mesh = parent.mesh
    return ErrorReport(
        h=mesh.h,
        h1_semi=e1,
        l2=e0,
        best_h1=b1,
        u_h1=function_seminorm(mesh, exact.derivative(1), quad_order),
        u_l2=function_seminorm(mesh, exact.derivative(0), quad_order),
    )


# inf-sup ---------------------------------------------------------------------


def _beta_dense(sys: AssembledSystem, rtol: float) -> float:
    l1 = cholesky(sys.H1)
    l2 = cholesky(sys.H2)
    x = l2.solve_lower(sys.A.to_dense())
    b = l1.solve_lower(x.T).T
    s = sla.svdvals(b, check_finite=False)
    smin, smax = float(s[-1]), float(s[0])
    return 0.0 if smin <= rtol * smax else smin


def _beta_eig(sys: AssembledSystem, rtol: float) -> float:
    # K = A^T H2^{-1} A via triangular solves against chol(H2).
    x = cholesky(sys.H2).solve_lower(sys.A.to_dense())
    k = x.T @ x
    lam, _ = min_gen_eig(k, sys.H1)
    return math.sqrt(lam)


def _beta_iterative(sys: AssembledSystem, rtol: float) -> float:
    n = sys.A.shape[0]
    try:
        lu = lu_factor(sys.A, pivot_tol=rtol)
    except SingularMatrixError:
        return 0.0
    l1 = cholesky(sys.H1)
    l2 = cholesky(sys.H2)
    L1, L2 = l1.to_banded(), l2.to_banded()
    L1T, L2T = L1.T, L2.T
    v0 = np.ones(n)
    # B^{-1} = L1^T A^{-1} L2, so beta = 1 / ||B^{-1}||.
    inv = LinearOperator(
        (n, n),
        matvec=lambda v: L1T @ lu.solve(L2 @ v),
        rmatvec=lambda v: L2T @ lu.solve(L1 @ v, trans=True),
        dtype=float,
    )
    fwd = LinearOperator(
        (n, n),
        matvec=lambda v: l2.solve_lower(sys.A @ l1.solve_lower(v, trans=True)),
        rmatvec=lambda v: l1.solve_lower(sys.A.T @ l2.solve_lower(v, trans=True)),
        dtype=float,
    )
    opts = dict(k=1, which="LM", tol=1e-13, v0=v0, return_singular_vectors=False, maxiter=20 * n)
    smax_inv = float(svds(inv, **opts)[0])
    smax = float(svds(fwd, **opts)[0])
    smin = 1.0 / smax_inv
    return 0.0 if smin <= rtol * smax else smin


def infsup_beta(trial: ReducedSpace, test: ReducedSpace, form: FormSpec,
                method: str = "auto", rtol: float | None = None) -> float:
    """Discrete inf-sup constant with both spaces in the H1 seminorm.

    ``beta^2`` is the smallest eigenvalue of ``A^T H2^{-1} A x = lam H1 x``,
    equivalently the smallest singular value of ``L2^{-1} A L1^{-T}`` with
    ``H_k = L_k L_k^T``.

    Parameters
    ----------
    method : {"auto", "svd", "eig", "iterative"}
        ``svd`` forms ``L2^{-1} A L1^{-T}`` densely and takes its singular
        values, which keeps small ``beta`` accurate relative to ``||A||``.
        ``eig`` solves the generalized eigenproblem (its error in ``beta^2``
        is of order ``eps * lam_max``).  ``iterative`` finds the norm of the
        inverse with banded solves only.  ``auto`` uses ``svd`` up to
        dimension ``DENSE_BETA_MAX`` and ``iterative`` above.
    rtol : float, optional
        ``beta <= rtol * ||L2^{-1} A L1^{-T}||`` is reported as 0.  Defaults
        to ``n * eps``.
    """
    sys = assemble_system(trial, test, form)
    return beta_from_system(sys, method, rtol)


def beta_from_system(sys: AssembledSystem, method: str = "auto", rtol: float | None = None) -> float:
    n = sys.A.shape[0]
    if rtol is None:
        rtol = n * np.finfo(float).eps
    if method == "auto":
        method = "svd" if n <= DENSE_BETA_MAX else "iterative"
    impl = {"svd": _beta_dense, "eig": _beta_eig, "iterative": _beta_iterative}.get(method)
    if impl is None:
        raise ValueError(f"unknown inf-sup method {method!r}")
    return impl(sys, rtol)


# rates -----------------------------------------------------------------------


def convergence_slope(points: Sequence[tuple[float, float]], window: int | None = 4) -> float:
    """Least-squares slope of ``log(error)`` against ``log(h)``.

    Uses the last ``window`` points (all points when ``window`` is None).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be a sequence of (h, error) pairs")
    if window is not None:
        pts = pts[-window:]
    if pts.shape[0] < 2:
        raise ValueError("need at least two points to fit a slope")
    if not np.all(np.isfinite(pts)) or np.any(pts <= 0):
        raise ValueError("h and error values must be finite and positive")
    return float(np.polyfit(np.log(pts[:, 0]), np.log(pts[:, 1]), 1)[0])
