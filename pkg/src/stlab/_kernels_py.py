"""Pure-numpy versions of the hot spline/assembly kernels.

Same signatures and results as the compiled ``_kernels`` module; loops run
over the (small) degree indices and are vectorized over points/elements.
"""
import numpy as np


def find_spans(knots, degree, x):
    """Knot span index of every point in ``x`` (0-based, clamped).

    The span ``s`` satisfies ``knots[s] <= x < knots[s+1]`` with
    ``degree <= s <= n-1``; the right endpoint falls into the last span.
    """
    knots = np.asarray(knots, dtype=float)
    x = np.asarray(x, dtype=float)
    n = knots.shape[0] - degree - 1
    spans = np.searchsorted(knots, x, side="right") - 1
    return np.clip(spans, degree, n - 1).astype(np.intp)


def basis_ders(knots, degree, x, spans, nder):
    """Nonzero B-splines and derivatives at the points ``x``.

    Returns an array of shape ``(len(x), nder+1, degree+1)`` whose entry
    ``[m, k, r]`` is the ``k``-th derivative of basis function
    ``spans[m] - degree + r`` at ``x[m]`` (Piegl & Tiller, A2.3).
    """
    knots = np.asarray(knots, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    spans = np.atleast_1d(np.asarray(spans, dtype=np.intp))
    p = degree
    m = x.shape[0]

    ndu = np.empty((m, p + 1, p + 1))
    left = np.empty((m, p + 1))
    right = np.empty((m, p + 1))
    ndu[:, 0, 0] = 1.0
    for j in range(1, p + 1):
        left[:, j] = x - knots[spans + 1 - j]
        right[:, j] = knots[spans + j] - x
        saved = np.zeros(m)
        for r in range(j):
            ndu[:, j, r] = right[:, r + 1] + left[:, j - r]
            temp = ndu[:, r, j - 1] / ndu[:, j, r]
            ndu[:, r, j] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        ndu[:, j, j] = saved

    ders = np.zeros((m, nder + 1, p + 1))
    ders[:, 0, :] = ndu[:, :, p]
    kmax = min(nder, p)
    a = np.empty((m, 2, p + 1))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[:, 0, 0] = 1.0
        for k in range(1, kmax + 1):
            d = np.zeros(m)
            rk = r - k
            pk = p - k
            if r >= k:
                a[:, s2, 0] = a[:, s1, 0] / ndu[:, pk + 1, rk]
                d += a[:, s2, 0] * ndu[:, rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[:, s2, j] = (a[:, s1, j] - a[:, s1, j - 1]) / ndu[:, pk + 1, rk + j]
                d += a[:, s2, j] * ndu[:, rk + j, pk]
            if r <= pk:
                a[:, s2, k] = -a[:, s1, k - 1] / ndu[:, pk + 1, r]
                d += a[:, s2, k] * ndu[:, r, pk]
            ders[:, k, r] = d
            s1, s2 = s2, s1

    fac = float(p)
    for k in range(1, nder + 1):
        ders[:, k, :] *= fac
        fac *= p - k
    return ders


def band_gram(phi, psi, w, first, n, degree):
    """Accumulate ``sum_e sum_q w phi_a psi_b`` into LAPACK band storage.

    ``phi`` (rows) and ``psi`` (columns) have shape ``(nel, nq, degree+1)``;
    ``first[e]`` is the global index of the first nonzero function on element
    ``e``.  The result ``ab`` has shape ``(2*degree+1, n)`` with
    ``ab[degree + i - j, j] = M[i, j]``.
    """
    p = degree
    phi = np.asarray(phi, dtype=float)
    psi = np.asarray(psi, dtype=float)
    w = np.asarray(w, dtype=float)
    first = np.asarray(first, dtype=np.intp)
    loc = np.einsum("eqa,eqb,eq->eab", phi, psi, w)
    ab = np.zeros((2 * p + 1, n))
    # Element spans start at consecutive indices, so for fixed (a, b) every
    # target column is distinct and plain fancy-index accumulation is safe.
    for a in range(p + 1):
        for b in range(p + 1):
            ab[p + a - b, first + b] += loc[:, a, b]
    return ab
