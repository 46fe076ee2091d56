"""Band storage, direct solvers and the smallest generalized eigenvalue.

Band matrices use the LAPACK general-band layout: ``ab[upper + i - j, j]``
holds entry ``(i, j)``.  Factorizations and triangular solves are delegated
to LAPACK through :mod:`scipy.linalg`.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

DENSE_CUTOFF = 32
_EPS = np.finfo(float).eps


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when an LU factorization produces a (numerically) zero pivot."""

    def __init__(self, message: str, pivot: float, index: int):
        super().__init__(message)
        self.pivot = pivot
        self.index = index


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Cholesky factorization failed; the matrix is not SPD."""


@dataclass(frozen=True)
class BandedMatrix:
    """Matrix with ``lower`` sub- and ``upper`` super-diagonals."""

    ab: np.ndarray
    lower: int
    upper: int
    shape: tuple
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.lower < 0 or self.upper < 0:
            raise ValueError("bandwidths must be nonnegative")
        if self.ab.shape != (self.lower + self.upper + 1, self.shape[1]):
            raise ValueError(
                f"band array shape {self.ab.shape} inconsistent with "
                f"({self.lower}, {self.upper}) and {self.shape}"
            )

    # construction -------------------------------------------------------

    @classmethod
    def from_dense(cls, a, lower=None, upper=None, tol=0.0) -> "BandedMatrix":
        a = np.asarray(a, dtype=float)
        nr, nc = a.shape
        if lower is None or upper is None:
            i, j = np.nonzero(np.abs(a) > tol)
            d = i - j
            lower = max(int(d.max()), 0) if d.size else 0
            upper = max(int(-d.min()), 0) if d.size else 0
        ab = np.zeros((lower + upper + 1, nc))
        for d in range(-upper, lower + 1):
            j0, j1 = max(0, -d), min(nc, nr - d)
            if j1 > j0:
                jj = np.arange(j0, j1)
                ab[upper + d, jj] = a[jj + d, jj]
        return cls(ab, lower, upper, (nr, nc))

    def to_dense(self) -> np.ndarray:
        nr, nc = self.shape
        a = np.zeros((nr, nc))
        for d in range(-self.upper, self.lower + 1):
            j0, j1 = max(0, -d), min(nc, nr - d)
            if j1 > j0:
                jj = np.arange(j0, j1)
                a[jj + d, jj] = self.ab[self.upper + d, jj]
        return a

    # structure ------------------------------------------------------------

    def diagonal(self, d: int = 0) -> np.ndarray:
        """Entries with ``i - j == d``."""
        nr, nc = self.shape
        j0, j1 = max(0, -d), min(nc, nr - d)
        if not -self.upper <= d <= self.lower:
            return np.zeros(max(j1 - j0, 0))
        return self.ab[self.upper + d, j0:j1].copy()

    def submatrix(self, rows: slice, cols: slice) -> "BandedMatrix":
        """Contiguous block ``M[rows, cols]`` kept in band form."""
        r0, r1, _ = rows.indices(self.shape[0])
        c0, c1, _ = cols.indices(self.shape[1])
        shift = r0 - c0
        lower, upper = self.lower - shift, self.upper + shift
        ab = self.ab[:, c0:c1].copy()
        # Storage row of entry (i, j) is unchanged; only rows outside the
        # block must be cleared.
        jj = np.arange(c0, c1)
        for k in range(ab.shape[0]):
            i = k - self.upper + jj
            ab[k, (i < r0) | (i >= r1)] = 0.0
        if upper < 0:
            ab, upper = np.vstack([np.zeros((-upper, ab.shape[1])), ab]), 0
        if lower < 0:
            ab, lower = np.vstack([ab, np.zeros((-lower, ab.shape[1]))]), 0
        return BandedMatrix(ab, lower, upper, (r1 - r0, c1 - c0), dict(self.meta))

    def widened(self, lower: int, upper: int) -> "BandedMatrix":
        if lower < self.lower or upper < self.upper:
            raise ValueError("can only widen a band")
        ab = np.zeros((lower + upper + 1, self.shape[1]))
        ab[upper - self.upper : upper + self.lower + 1] = self.ab
        return BandedMatrix(ab, lower, upper, self.shape, dict(self.meta))

    @property
    def T(self) -> "BandedMatrix":
        nr, nc = self.shape
        ab = np.zeros((self.lower + self.upper + 1, nr))
        for d in range(-self.upper, self.lower + 1):
            j0, j1 = max(0, -d), min(nc, nr - d)
            if j1 > j0:
                jj = np.arange(j0, j1)
                # (i, j) = (j + d, j) moves to (j, j + d): diagonal -d
                ab[self.lower - d, jj + d] = self.ab[self.upper + d, jj]
        return BandedMatrix(ab, self.upper, self.lower, (nc, nr), dict(self.meta))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.ab))) if self.ab.size else 0.0

    def is_symmetric(self, rtol: float = 1e-14) -> bool:
        if self.shape[0] != self.shape[1]:
            return False
        scale = max(self.max_abs(), np.finfo(float).tiny)
        l = max(self.lower, self.upper)
        return all(
            np.max(np.abs(self.diagonal(d) - self.diagonal(-d)), initial=0.0) <= rtol * scale
            for d in range(1, l + 1)
        )

    # arithmetic -----------------------------------------------------------

    def _aligned(self, other):
        l, u = max(self.lower, other.lower), max(self.upper, other.upper)
        return self.widened(l, u), other.widened(l, u)

    def __add__(self, other: "BandedMatrix") -> "BandedMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        a, b = self._aligned(other)
        return BandedMatrix(a.ab + b.ab, a.lower, a.upper, self.shape, dict(self.meta))

    def __sub__(self, other: "BandedMatrix") -> "BandedMatrix":
        return self + other * -1.0

    def __mul__(self, c: float) -> "BandedMatrix":
        return BandedMatrix(self.ab * c, self.lower, self.upper, self.shape, dict(self.meta))

    __rmul__ = __mul__

    def __matmul__(self, x):
        x = np.asarray(x, dtype=float)
        nr, nc = self.shape
        y = np.zeros((nr,) + x.shape[1:])
        for d in range(-self.upper, self.lower + 1):
            j0, j1 = max(0, -d), min(nc, nr - d)
            if j1 > j0:
                v = self.ab[self.upper + d, j0:j1]
                y[j0 + d : j1 + d] += v.reshape((-1,) + (1,) * (x.ndim - 1)) * x[j0:j1]
        return y


# direct solvers -------------------------------------------------------------


def _pivot_check(diag: np.ndarray, n: int, pivot_tol: float) -> float:
    """Raise if a pivot is zero (or below ``pivot_tol`` relative); return min/max ratio."""
    mags = np.abs(diag)
    k = int(np.argmin(mags))
    scale = float(np.max(mags)) if mags.size else 0.0
    ratio = float(mags[k]) / scale if scale > 0 and np.isfinite(scale) else 0.0
    if not np.all(np.isfinite(mags)) or scale == 0.0 or mags[k] <= pivot_tol * scale or mags[k] == 0.0:
        raise SingularMatrixError(
            f"matrix is singular to working precision: pivot {k} has magnitude "
            f"{mags[k]:.3e} (largest pivot {scale:.3e})",
            pivot=float(mags[k]),
            index=k,
        )
    return ratio


@dataclass(frozen=True)
class LUFactor:
    """Pivoted LU factors, banded (``gbtrf`` layout) or dense."""

    lu: np.ndarray
    piv: np.ndarray
    kl: int | None = None
    ku: int | None = None
    pivot_ratio: float = 1.0

    @property
    def n(self) -> int:
        return self.lu.shape[1]

    @property
    def banded(self) -> bool:
        return self.kl is not None

    def solve(self, b, trans: bool = False) -> np.ndarray:
        """``A^{-1} b`` (or ``A^{-T} b`` with ``trans``)."""
        b = np.asarray(b, dtype=float)
        if self.banded:
            x, info = lapack.dgbtrs(self.lu, self.kl, self.ku, b.reshape(self.n, -1), self.piv,
                                    trans=int(trans))
            if info != 0:
                raise ValueError(f"dgbtrs: illegal argument {-info}")
            return x.reshape(b.shape)
        return sla.lu_solve((self.lu, self.piv), b, trans=int(trans), check_finite=False)


def lu_factor(a, pivot_tol: float = 0.0) -> LUFactor:
    """LU factorization with partial pivoting.

    ``a`` may be a :class:`BandedMatrix` or a dense array.  Band systems of
    dimension ``>= DENSE_CUTOFF`` are factored in band form (``gbtrf``),
    smaller ones densely.  Raises :class:`SingularMatrixError` with the
    offending pivot magnitude when a pivot is exactly zero or at most
    ``pivot_tol`` times the largest one.  The default accepts any nonzero
    pivot, since ill-conditioned systems are solved on purpose to expose
    instabilities; ``pivot_ratio`` on the result reports min/max pivot.
    """
    if isinstance(a, BandedMatrix):
        if a.shape[0] != a.shape[1]:
            raise ValueError(f"matrix must be square, got {a.shape}")
        n = a.shape[0]
        if n >= DENSE_CUTOFF:
            kl, ku = a.lower, a.upper
            work = np.zeros((2 * kl + ku + 1, n))
            work[kl:] = a.ab
            lu, ipiv, info = lapack.dgbtrf(work, kl, ku)
            if info < 0:
                raise ValueError(f"dgbtrf: illegal argument {-info}")
            ratio = _pivot_check(lu[kl + ku], n, pivot_tol)
            return LUFactor(lu, ipiv, kl, ku, ratio)
        a = a.to_dense()
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got {a.shape}")
    with warnings.catch_warnings():
        # Exact zero pivots are reported below with their location.
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(a, check_finite=False)
    ratio = _pivot_check(np.diag(lu), a.shape[0], pivot_tol)
    return LUFactor(lu, piv, pivot_ratio=ratio)


def lu_solve(a, b, pivot_tol: float = 0.0) -> np.ndarray:
    """Solve ``A x = b``; see :func:`lu_factor` for storage and errors."""
    return lu_factor(a, pivot_tol).solve(b)


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower band factor ``L`` with ``L L^T = H``; ``cb[i - j, j] = L[i, j]``."""

    cb: np.ndarray

    @property
    def n(self) -> int:
        return self.cb.shape[1]

    @property
    def bandwidth(self) -> int:
        return self.cb.shape[0] - 1

    def solve(self, b) -> np.ndarray:
        return sla.cho_solve_banded((self.cb, True), np.asarray(b, dtype=float), check_finite=False)

    def solve_lower(self, b, trans: bool = False) -> np.ndarray:
        """``L^{-1} b`` (``L^{-T} b`` with ``trans``) for one or many right-hand sides."""
        b = np.asarray(b, dtype=float)
        x, info = lapack.dtbtrs(self.cb, b.reshape(self.n, -1), uplo="L", trans="T" if trans else "N")
        if info != 0:
            raise np.linalg.LinAlgError(f"dtbtrs failed with info={info}")
        return x.reshape(b.shape)

    def to_banded(self) -> BandedMatrix:
        return BandedMatrix(self.cb.copy(), self.bandwidth, 0, (self.n, self.n))


def cholesky(h: BandedMatrix) -> CholeskyFactor:
    """Band Cholesky factorization of a symmetric positive-definite matrix."""
    if h.shape[0] != h.shape[1]:
        raise ValueError("Cholesky needs a square matrix")
    if not h.is_symmetric(rtol=1e-12):
        raise NotPositiveDefiniteError("matrix is not symmetric")
    l = max(h.lower, h.upper)
    lower_form = h.widened(l, l).ab[l:]
    try:
        cb = sla.cholesky_banded(lower_form, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"matrix is not positive definite: {exc}") from exc
    return CholeskyFactor(cb)


# generalized eigenproblem --------------------------------------------------------


def min_gen_eig(k, m, clamp_tol: float = 1e-12):
    """Smallest eigenpair of the symmetric-definite pencil ``K x = lam M x``.

    ``M = C C^T`` is Cholesky-factored, ``C^{-1} K C^{-T}`` is reduced to
    tridiagonal form and solved for its smallest eigenvalue, and the vector
    is transformed back (normalized so that ``x^T M x = 1``).  A slightly
    negative eigenvalue (``> -clamp_tol`` times the spectral scale) is
    reported as 0.
    """
    k = k.to_dense() if isinstance(k, BandedMatrix) else np.asarray(k, dtype=float)
    m = m.to_dense() if isinstance(m, BandedMatrix) else np.asarray(m, dtype=float)
    if k.shape != m.shape or k.shape[0] != k.shape[1]:
        raise ValueError(f"incompatible shapes {k.shape} and {m.shape}")
    try:
        c = sla.cholesky(m, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"M is not positive definite: {exc}") from exc
    w = sla.solve_triangular(c, k, lower=True, check_finite=False)
    w = sla.solve_triangular(c, w.T, lower=True, check_finite=False)
    w = 0.5 * (w + w.T)
    lam, y = sla.eigh(w, subset_by_index=[0, 0], check_finite=False)
    scale = max(float(np.max(np.abs(np.diag(w)))), 1.0)
    lam0 = float(lam[0])
    if lam0 < 0.0:
        if lam0 < -clamp_tol * scale:
            raise np.linalg.LinAlgError(
                f"pencil is not positive semidefinite: smallest eigenvalue {lam0:.3e}"
            )
        lam0 = 0.0
    x = sla.solve_triangular(c, y[:, 0], lower=True, trans="T", check_finite=False)
    return lam0, x
