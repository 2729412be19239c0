# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled row kernel; mirrors ``_fallback.term_stress_matrix``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, pow

cnp.import_array()

N_TERMS = 14


cdef inline void _ps(const double[:, ::1] r, Py_ssize_t i, double ws,
                     double* g, double* dg) noexcept nogil:
    cdef double s, d, pw, inv
    cdef int k
    g[0] = 0.0
    dg[0] = 0.0
    if ws == 0.0:
        return
    for k in range(3):
        s = r[i, 6 + k]
        d = r[i, 9 + k]
        if d == 0.0:
            continue
        pw = pow(s, ws - 1.0)
        inv = 1.0 / s
        g[0] += ws * (pw - inv) * d
        dg[0] += ((pw - inv) + ws * pw * log(s)) * d


def term_stress_matrix(rows, w_star):
    cdef const double[:, ::1] r = np.ascontiguousarray(rows, dtype=np.float64)
    cdef const double[::1] ws = np.ascontiguousarray(w_star, dtype=np.float64)
    cdef Py_ssize_t n = r.shape[0]
    G_arr = np.zeros((n, N_TERMS))
    dG_arr = np.zeros((n, N_TERMS))
    cdef double[:, ::1] G = G_arr
    cdef double[:, ::1] dG = dG_arr
    cdef Py_ssize_t i
    cdef int base, k
    cdef double x, y, j, c1, c2, cj, lnj, v, c, w, e, pw, jw, jw1, g, dg
    with nogil:
        for i in range(n):
            x = r[i, 0] - 3.0
            y = r[i, 1] - 3.0
            j = r[i, 2]
            c1 = r[i, 3]
            c2 = r[i, 4]
            cj = r[i, 5]
            lnj = log(j)
            for base in range(0, 8, 4):
                if base == 0:
                    v = x
                    c = c1
                else:
                    v = y
                    c = c2
                G[i, base] = c
                w = ws[base + 1]
                e = exp(w * v)
                G[i, base + 1] = w * e * c
                dG[i, base + 1] = e * (1.0 + w * v) * c
                G[i, base + 2] = 2.0 * v * c
                w = ws[base + 3]
                e = exp(w * v * v)
                G[i, base + 3] = 2.0 * w * v * e * c
                dG[i, base + 3] = 2.0 * v * e * (1.0 + w * v * v) * c

            w = ws[8]
            pw = pow(j, w - 1.0)
            G[i, 8] = w * (pw - 1.0 / j) * cj
            dG[i, 8] = ((pw - 1.0 / j) + w * pw * lnj) * cj

            w = ws[9]
            e = exp(w * lnj * lnj)
            G[i, 9] = 2.0 * w * lnj / j * e * cj
            dG[i, 9] = 2.0 * lnj / j * e * (1.0 + w * lnj * lnj) * cj

            for k in range(10, 12):
                if k == 10:
                    v = x
                    c = c1
                else:
                    v = y
                    c = c2
                w = ws[k]
                jw = pow(j, w)
                jw1 = pow(j, w - 1.0)
                G[i, k] = jw * c + w * jw1 * v * cj
                dG[i, k] = jw * lnj * c + v * jw1 * (1.0 + w * lnj) * cj

            for k in range(12, 14):
                _ps(r, i, ws[k], &g, &dg)
                G[i, k] = g
                dG[i, k] = dg
    return G_arr, dG_arr
