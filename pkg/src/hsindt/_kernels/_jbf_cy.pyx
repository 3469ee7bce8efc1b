# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled joint bilateral filter kernel (hot inner loop)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, isfinite, NAN

cnp.import_array()


def jbf(const cnp.float64_t[:, :, ::1] values_bsq,
        const cnp.float64_t[:, ::1] guide,
        double sigma_d, double sigma_r,
        Py_ssize_t half_rows, Py_ssize_t half_cols):
    cdef Py_ssize_t nbands = values_bsq.shape[0]
    cdef Py_ssize_t nrows = values_bsq.shape[1]
    cdef Py_ssize_t ncols = values_bsq.shape[2]
    out_arr = np.empty((nbands, nrows, ncols), dtype=np.float64)
    cdef cnp.float64_t[:, :, ::1] out = out_arr
    num_arr = np.empty(nbands, dtype=np.float64)
    den_arr = np.empty(nbands, dtype=np.float64)
    cdef cnp.float64_t[::1] num = num_arr
    cdef cnp.float64_t[::1] den = den_arr

    cdef double inv2sd = 1.0 / (2.0 * sigma_d * sigma_d)
    cdef double inv2sr = 1.0 / (2.0 * sigma_r * sigma_r)
    cdef Py_ssize_t i, j, p, q, b, p0, p1, q0, q1
    cdef double gc, gdiff, w, v

    for i in range(nrows):
        for j in range(ncols):
            gc = guide[i, j]
            if not isfinite(gc):
                for b in range(nbands):
                    out[b, i, j] = NAN
                continue
            for b in range(nbands):
                num[b] = 0.0
                den[b] = 0.0
            p0 = i - half_rows if i >= half_rows else 0
            p1 = i + half_rows + 1
            if p1 > nrows:
                p1 = nrows
            q0 = j - half_cols if j >= half_cols else 0
            q1 = j + half_cols + 1
            if q1 > ncols:
                q1 = ncols
            for p in range(p0, p1):
                for q in range(q0, q1):
                    gdiff = gc - guide[p, q]
                    if not isfinite(gdiff):
                        continue
                    w = exp(-((i - p) * (i - p) + (j - q) * (j - q)) * inv2sd
                            - gdiff * gdiff * inv2sr)
                    for b in range(nbands):
                        v = values_bsq[b, p, q]
                        if isfinite(v):
                            num[b] += w * v
                            den[b] += w
            for b in range(nbands):
                out[b, i, j] = num[b] / den[b] if den[b] > 0.0 else NAN
    return out_arr
