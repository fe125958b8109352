# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-node kernels; same contracts as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline double _deta(const double* u, const double* v) noexcept nogil:
    return 2.0 * (u[0] * v[1] - u[1] * v[0] + u[2] * v[3] - u[3] * v[2])


def frame_vectors(points):
    cdef const double[:, ::1] p = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], i
    out = np.empty((n, 3, 4))
    cdef double[:, :, ::1] o = out
    cdef double x1, y1, x2, y2
    with nogil:
        for i in range(n):
            x1 = p[i, 0]; y1 = p[i, 1]; x2 = p[i, 2]; y2 = p[i, 3]
            o[i, 0, 0] = -y1; o[i, 0, 1] = x1; o[i, 0, 2] = -y2; o[i, 0, 3] = x2
            o[i, 1, 0] = -x2; o[i, 1, 1] = y2; o[i, 1, 2] = x1; o[i, 1, 3] = -y1
            o[i, 2, 0] = -y2; o[i, 2, 1] = -x2; o[i, 2, 2] = y1; o[i, 2, 3] = x1
    return out


cdef inline void _pullback_one(const double* q, const double* P, double* beta, double* omega) noexcept nogil:
    # P is one node's 3x4 row-major block of pushed frame vectors
    cdef double xi0 = -q[1], xi1 = q[0], xi2 = -q[3], xi3 = q[2]
    cdef int j
    for j in range(3):
        beta[j] = xi0 * P[4 * j] + xi1 * P[4 * j + 1] + xi2 * P[4 * j + 2] + xi3 * P[4 * j + 3]
    omega[0] = _deta(P + 4, P + 8)
    omega[1] = _deta(P + 8, P)
    omega[2] = _deta(P, P + 4)


def pullback_components(images, pushed):
    cdef const double[:, ::1] q = np.ascontiguousarray(images, dtype=np.float64)
    cdef const double[:, :, ::1] P = np.ascontiguousarray(pushed, dtype=np.float64)
    cdef Py_ssize_t n = q.shape[0], i
    beta_arr = np.empty((n, 3))
    omega_arr = np.empty((n, 3))
    cdef double[:, ::1] beta = beta_arr
    cdef double[:, ::1] omega = omega_arr
    with nogil:
        for i in range(n):
            _pullback_one(&q[i, 0], &P[i, 0, 0], &beta[i, 0], &omega[i, 0])
    return beta_arr, omega_arr


def energy_degree(images, pushed, coupling, weights):
    cdef const double[:, ::1] q = np.ascontiguousarray(images, dtype=np.float64)
    cdef const double[:, :, ::1] P = np.ascontiguousarray(pushed, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[::1] c = np.ascontiguousarray(
        np.broadcast_to(np.asarray(coupling, dtype=np.float64), (q.shape[0],)))
    cdef Py_ssize_t n = q.shape[0], i
    cdef double b[3]
    cdef double o[3]
    cdef double b2, w2, bw
    # Kahan-compensated accumulation
    cdef double e_sum = 0.0, e_comp = 0.0, d_sum = 0.0, d_comp = 0.0, y, t
    with nogil:
        for i in range(n):
            _pullback_one(&q[i, 0], &P[i, 0, 0], b, o)
            b2 = b[0] * b[0] + b[1] * b[1] + b[2] * b[2]
            w2 = o[0] * o[0] + o[1] * o[1] + o[2] * o[2]
            bw = b[0] * o[0] + b[1] * o[1] + b[2] * o[2]
            y = w[i] * (c[i] * b2 + w2 / c[i]) - e_comp
            t = e_sum + y
            e_comp = (t - e_sum) - y
            e_sum = t
            y = w[i] * bw - d_comp
            t = d_sum + y
            d_comp = (t - d_sum) - y
            d_sum = t
    return 0.5 * e_sum, d_sum
