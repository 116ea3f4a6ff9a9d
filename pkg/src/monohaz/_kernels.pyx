# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: weighted pool-adjacent-violators and the batched
Monte Carlo statistic. Mirrors ``_pykernels`` exactly."""

import numpy as np

NAME = "cython"


cdef Py_ssize_t _pava(const double[:] num, const double[:] den,
                      Py_ssize_t lo, Py_ssize_t hi, bint decreasing,
                      double[:] bnum, double[:] bden,
                      Py_ssize_t[:] bstart) noexcept nogil:
    # returns the number of blocks; blocks written to bnum/bden/bstart
    cdef Py_ssize_t top = 0, i
    cdef double cn, cd, prev, cur
    cdef Py_ssize_t cs
    for i in range(lo, hi):
        cn = num[i]
        cd = den[i]
        cs = i
        while top > 0:
            prev = bnum[top - 1] / bden[top - 1]
            cur = cn / cd
            if (prev <= cur) if decreasing else (prev >= cur):
                top -= 1
                cn = cn + bnum[top]
                cd = cd + bden[top]
                cs = bstart[top]
            else:
                break
        bnum[top] = cn
        bden[top] = cd
        bstart[top] = cs
        top += 1
    return top


cdef void _fill(Py_ssize_t nb, Py_ssize_t hi, double[:] bnum, double[:] bden,
                Py_ssize_t[:] bstart, double[:] out) noexcept nogil:
    cdef Py_ssize_t k, i, end
    cdef double v
    for k in range(nb):
        v = bnum[k] / bden[k]
        end = bstart[k + 1] if k + 1 < nb else hi
        for i in range(bstart[k], end):
            out[i] = v


def isotonic_blocks(num, den, decreasing=False):
    """Weighted isotonic regression of ``num/den`` with weights ``den``.

    Returns ``(starts, values)`` with strictly monotone block values.
    """
    cdef double[:] cnum = np.ascontiguousarray(num, dtype=np.float64)
    cdef double[:] cden = np.ascontiguousarray(den, dtype=np.float64)
    cdef Py_ssize_t n = cnum.shape[0]
    bnum = np.empty(n)
    bden = np.empty(n)
    bstart = np.empty(n, dtype=np.intp)
    cdef double[:] vbnum = bnum
    cdef double[:] vbden = bden
    cdef Py_ssize_t[:] vbstart = bstart
    cdef bint dec = decreasing
    cdef Py_ssize_t nb
    with nogil:
        nb = _pava(cnum, cden, 0, n, dec, vbnum, vbden, vbstart)
    return bstart[:nb].astype(np.int64), bnum[:nb] / bden[:nb]


def d_statistic_batch(paths, double h):
    """Discretized ``int (g^2 - g0^2)`` per row; see ``_pykernels``."""
    cdef double[:, ::1] p = np.ascontiguousarray(paths, dtype=np.float64)
    cdef Py_ssize_t n_paths = p.shape[0], m = p.shape[1]
    cdef Py_ssize_t ncell = m - 1, k = (m - 1) // 2
    out_d = np.empty(n_paths)
    out_t = np.zeros(n_paths, dtype=np.int8)
    cdef double[:] vd = out_d
    cdef signed char[:] vt = out_t
    cdef double[:] dy = np.empty(ncell)
    cdef double[:] den = np.full(ncell, h)
    cdef double[:] g = np.empty(ncell)
    cdef double[:] g0 = np.empty(ncell)
    cdef double[:] bnum = np.empty(ncell)
    cdef double[:] bden = np.empty(ncell)
    cdef Py_ssize_t[:] bstart = np.empty(ncell, dtype=np.intp)
    cdef Py_ssize_t r, i, nb
    cdef double total, a, b
    with nogil:
        for r in range(n_paths):
            for i in range(ncell):
                dy[i] = p[r, i + 1] - p[r, i]
            nb = _pava(dy, den, 0, ncell, False, bnum, bden, bstart)
            _fill(nb, ncell, bnum, bden, bstart, g)
            nb = _pava(dy, den, 0, k, False, bnum, bden, bstart)
            _fill(nb, k, bnum, bden, bstart, g0)
            nb = _pava(dy, den, k, ncell, False, bnum, bden, bstart)
            _fill(nb, ncell, bnum, bden, bstart, g0)
            total = 0.0
            for i in range(ncell):
                if i < k:
                    if g0[i] > 0.0:
                        g0[i] = 0.0
                elif g0[i] < 0.0:
                    g0[i] = 0.0
                a = g[i]
                b = g0[i]
                if a != b:
                    total = total + (a * a - b * b)
            vd[r] = total * h
            vt[r] = (g[0] != g0[0]) or (g[ncell - 1] != g0[ncell - 1])
    return out_d, out_t
