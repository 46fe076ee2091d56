# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled spline/assembly kernels.

Drop-in replacement for :mod:`stlab._kernels_py`; see that module for the
meaning of arguments and results.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def find_spans(knots, int degree, x):
    cdef const double[::1] kv = np.ascontiguousarray(knots, dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64)
    cdef Py_ssize_t m = xv.shape[0]
    cdef Py_ssize_t n = kv.shape[0] - degree - 1
    cdef Py_ssize_t i, lo, hi, mid
    cdef Py_ssize_t prev = degree
    cdef double xi
    out = np.empty(m, dtype=np.intp)
    cdef Py_ssize_t[::1] sv = out
    for i in range(m):
        xi = xv[i]
        if xi >= kv[n]:
            sv[i] = n - 1
            continue
        if xi <= kv[degree]:
            sv[i] = degree
            continue
        # sorted input usually stays in the previous span
        if kv[prev] <= xi < kv[prev + 1]:
            sv[i] = prev
            continue
        lo = degree
        hi = n
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if xi < kv[mid]:
                hi = mid
            else:
                lo = mid
        sv[i] = lo
        prev = lo
    return out


cdef void _ders_one(const double[::1] kv, int p, double x, Py_ssize_t span,
                    int nder, double[:, ::1] ndu, double[::1] left,
                    double[::1] right, double[:, ::1] a,
                    double[:, :, ::1] out, Py_ssize_t m) noexcept nogil:
    cdef int j, r, k, s1, s2, rk, pk, j1, j2, jj
    cdef double saved, temp, d, fac
    ndu[0, 0] = 1.0
    for j in range(1, p + 1):
        left[j] = x - kv[span + 1 - j]
        right[j] = kv[span + j] - x
        saved = 0.0
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved
    for r in range(p + 1):
        out[m, 0, r] = ndu[r, p]
        for k in range(1, nder + 1):
            out[m, k, r] = 0.0
    cdef int kmax = nder if nder < p else p
    for r in range(p + 1):
        s1 = 0
        s2 = 1
        a[0, 0] = 1.0
        for k in range(1, kmax + 1):
            d = 0.0
            rk = r - k
            pk = p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            if rk >= -1:
                j1 = 1
            else:
                j1 = -rk
            if r - 1 <= pk:
                j2 = k - 1
            else:
                j2 = p - r
            for jj in range(j1, j2 + 1):
                a[s2, jj] = (a[s1, jj] - a[s1, jj - 1]) / ndu[pk + 1, rk + jj]
                d += a[s2, jj] * ndu[rk + jj, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            out[m, k, r] = d
            j = s1
            s1 = s2
            s2 = j
    fac = p
    for k in range(1, nder + 1):
        for r in range(p + 1):
            out[m, k, r] *= fac
        fac *= p - k


def basis_ders(knots, int degree, x, spans, int nder):
    cdef const double[::1] kv = np.ascontiguousarray(knots, dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64)
    cdef const Py_ssize_t[::1] sv = np.ascontiguousarray(np.atleast_1d(spans), dtype=np.intp)
    cdef Py_ssize_t npts = xv.shape[0]
    cdef int p = degree
    out = np.empty((npts, nder + 1, p + 1), dtype=np.float64)
    cdef double[:, :, ::1] ov = out
    cdef double[:, ::1] ndu = np.empty((p + 1, p + 1), dtype=np.float64)
    cdef double[::1] left = np.empty(p + 1, dtype=np.float64)
    cdef double[::1] right = np.empty(p + 1, dtype=np.float64)
    cdef double[:, ::1] a = np.empty((2, p + 1), dtype=np.float64)
    cdef Py_ssize_t m
    with nogil:
        for m in range(npts):
            _ders_one(kv, p, xv[m], sv[m], nder, ndu, left, right, a, ov, m)
    return out


def band_gram(phi, psi, w, first, Py_ssize_t n, int degree):
    cdef const double[:, :, ::1] fv = np.ascontiguousarray(phi, dtype=np.float64)
    cdef const double[:, :, ::1] gv = np.ascontiguousarray(psi, dtype=np.float64)
    cdef const double[:, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef const Py_ssize_t[::1] firstv = np.ascontiguousarray(first, dtype=np.intp)
    cdef int p = degree
    cdef Py_ssize_t nel = fv.shape[0]
    cdef Py_ssize_t nq = fv.shape[1]
    cdef Py_ssize_t e, q, i, j
    cdef int a, b
    cdef double wf, s
    ab = np.zeros((2 * p + 1, n), dtype=np.float64)
    cdef double[:, ::1] abv = ab
    with nogil:
        for e in range(nel):
            for a in range(p + 1):
                i = firstv[e] + a
                for b in range(p + 1):
                    j = firstv[e] + b
                    s = 0.0
                    for q in range(nq):
                        s += wv[e, q] * fv[e, q, a] * gv[e, q, b]
                    abv[p + i - j, j] += s
    return ab
