# cython: boundscheck=False, wraparound=False, initializedcheck=False
# Compiled walk-length kernel; semantics must match _pure.walk_lengths.

import numpy as np

from libc.math cimport cos, fabs, sin, sqrt


def walk_lengths(const double[:, ::1] rows, int reps):
    cdef Py_ssize_t n_rows = rows.shape[0]
    cdef Py_ssize_t n_cols = rows.shape[1]
    out_arr = np.empty(n_rows, dtype=np.float64)
    cdef double[::1] out = out_arr

    # per-column density-matrix entries of the current row
    p_arr = np.empty(n_cols, dtype=np.float64)
    s_arr = np.empty(n_cols, dtype=np.float64)
    qr_arr = np.empty(n_cols, dtype=np.float64)
    qi_arr = np.empty(n_cols, dtype=np.float64)
    cdef double[::1] p = p_arr
    cdef double[::1] s = s_arr
    cdef double[::1] qr = qr_arr
    cdef double[::1] qi = qi_arr

    cdef double sqrt1_2 = sqrt(0.5)
    cdef Py_ssize_t r, c, nxt
    cdef int k
    cdef double x, ph_r, ph_i
    cdef double a0r, a0i, a1r, a1i, t0r, t0i, ur, ui, vr, vi
    cdef double dp, ds, dqr, dqi, mid, disc, total

    with nogil:
        for r in range(n_rows):
            for c in range(n_cols):
                x = rows[r, c]
                ph_r = cos(2.0 * x)
                ph_i = sin(2.0 * x)
                a0r = 1.0
                a0i = 0.0
                a1r = 0.0
                a1i = 0.0
                for k in range(reps):
                    t0r = (a0r + a1r) * sqrt1_2
                    t0i = (a0i + a1i) * sqrt1_2
                    ur = a0r - a1r
                    ui = a0i - a1i
                    vr = ph_r * ur - ph_i * ui
                    vi = ph_r * ui + ph_i * ur
                    a0r = t0r
                    a0i = t0i
                    a1r = vr * sqrt1_2
                    a1i = vi * sqrt1_2
                p[c] = a0r * a0r + a0i * a0i
                s[c] = a1r * a1r + a1i * a1i
                qr[c] = a0r * a1r + a0i * a1i
                qi[c] = a0i * a1r - a0r * a1i

            total = 0.0
            for c in range(n_cols):
                nxt = c + 1 if c + 1 < n_cols else 0
                dp = p[c] - p[nxt]
                ds = s[c] - s[nxt]
                dqr = qr[c] - qr[nxt]
                dqi = qi[c] - qi[nxt]
                mid = 0.5 * (dp + ds)
                disc = sqrt((0.5 * (dp - ds)) ** 2 + dqr * dqr + dqi * dqi)
                total += 0.5 * (fabs(mid + disc) + fabs(mid - disc))
            out[r] = total

    return out_arr
