# cython: boundscheck=False, wraparound=False, cdivision=True
# Compiled kernels for the two pairwise matrix builds.  Contracts and
# float semantics match _fallback.py exactly; tests assert bit parity.

from libc.math cimport INFINITY

import numpy as np


def minplus_block(double[:, ::1] g, Py_ssize_t i0, Py_ssize_t i1,
                  double[:, ::1] out):
    # out[i, j] = min_t g[i, t] + g[j, t] for j >= i, mirrored to out[j, i].
    # Rows of g are ancestor costs and mostly +inf; an inf g[i, t] makes every
    # sum through t inf, so those t are skipped outright (never the minimum
    # while any finite candidate exists, and the result is inf either way).
    # The j loop then runs contiguously over the transposed matrix, which the
    # C compiler vectorizes.  Mirror writes stay race-free under
    # row-partitioned threading: cell (j, i) with i < j is only ever written
    # by the block owning row i.
    cdef Py_ssize_t m = g.shape[0]
    cdef Py_ssize_t n = g.shape[1]
    cdef double[:, ::1] gt = np.ascontiguousarray(np.asarray(g).T)
    cdef double[::1] tmp = np.empty(m)
    cdef Py_ssize_t i, j, t
    cdef double c, s
    with nogil:
        for i in range(i0, i1):
            for j in range(i, m):
                tmp[j] = INFINITY
            for t in range(n):
                c = g[i, t]
                if c == INFINITY:
                    continue
                for j in range(i, m):
                    s = c + gt[t, j]
                    tmp[j] = s if s < tmp[j] else tmp[j]
            for j in range(i, m):
                out[i, j] = tmp[j]
                out[j, i] = tmp[j]


cdef inline double _agg(double a, double b, bint use_min) noexcept nogil:
    if use_min:
        return a if a < b else b
    return (a + b) * 0.5


def pair_rect(double[:, ::1] v,
              Py_ssize_t[::1] al, Py_ssize_t[::1] ar,
              Py_ssize_t[::1] bl, Py_ssize_t[::1] br,
              bint symmetric_kind, bint use_min,
              double[:, ::1] out):
    cdef Py_ssize_t na = al.shape[0]
    cdef Py_ssize_t nb = bl.shape[0]
    cdef Py_ssize_t i, j
    cdef double s1, s2
    with nogil:
        for i in range(na):
            for j in range(nb):
                s1 = _agg(v[al[i], bl[j]], v[ar[i], br[j]], use_min)
                if symmetric_kind:
                    s2 = _agg(v[al[i], br[j]], v[ar[i], bl[j]], use_min)
                    if s2 > s1:
                        s1 = s2
                out[i, j] = s1


def pair_matrix_block(double[:, ::1] v,
                      Py_ssize_t[::1] li, Py_ssize_t[::1] ri,
                      bint symmetric_kind, bint use_min,
                      Py_ssize_t i0, Py_ssize_t i1,
                      double[:, ::1] out):
    # Square case: compute j >= i only and mirror (the pair similarity is
    # symmetric whenever v is).
    cdef Py_ssize_t m = li.shape[0]
    cdef Py_ssize_t i, j
    cdef double s1, s2
    with nogil:
        for i in range(i0, i1):
            for j in range(i, m):
                s1 = _agg(v[li[i], li[j]], v[ri[i], ri[j]], use_min)
                if symmetric_kind:
                    s2 = _agg(v[li[i], ri[j]], v[ri[i], li[j]], use_min)
                    if s2 > s1:
                        s1 = s2
                out[i, j] = s1
                out[j, i] = s1
