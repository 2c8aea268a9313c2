# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled march kernels. Arithmetic order mirrors _kernels_py exactly."""

import numpy as np

cimport numpy as cnp


def wave_march(double[:, ::1] u, const double[:, ::1] wh, const double[:, ::1] cm,
               const double[:, ::1] vol, const double[:, ::1] src,
               double m2, double dt2, double inv_dx2):
    cdef Py_ssize_t nt = u.shape[0]
    cdef Py_ssize_t nx = u.shape[1]
    cdef Py_ssize_t n, j, jp, jm
    cdef double flux, un, um
    for n in range(1, nt - 1):
        for j in range(nx):
            jp = j + 1 if j + 1 < nx else 0
            jm = j - 1 if j > 0 else nx - 1
            un = u[n, j]
            um = u[n - 1, j]
            flux = cm[n, j] * (u[n, jp] - un) - cm[n, jm] * (un - u[n, jm])
            u[n + 1, j] = un + (
                wh[n - 1, j] * (un - um)
                + dt2 * (flux * inv_dx2 + vol[n, j] * (src[n, j] - m2 * un))
            ) / wh[n, j]
    return np.asarray(u)


def dirac_march(double complex[:, ::1] p1, double complex[:, ::1] p2,
                const double[:, ::1] cs, const double[:, ::1] g1,
                const double[:, ::1] g2, const double[:, ::1] sb,
                const double[:, ::1] f1, const double[:, ::1] f2,
                double m, double dt, double inv_dx):
    cdef Py_ssize_t nt = p1.shape[0]
    cdef Py_ssize_t nx = p1.shape[1]
    cdef Py_ssize_t n, j, jp, jm
    cdef double complex a1, a2, d1, d2
    for n in range(nt - 1):
        for j in range(nx):
            jp = j + 1 if j + 1 < nx else 0
            jm = j - 1 if j > 0 else nx - 1
            a1 = p1[n, j]
            a2 = p2[n, j]
            d1 = (p1[n, jp] - a1) * inv_dx
            d2 = (a2 - p2[n, jm]) * inv_dx
            p1[n + 1, j] = a1 + dt * (
                cs[n, j] * d1 + g1[n, j] * a1 - 1j * m * sb[n, j] * a2 + sb[n, j] * f2[n, j]
            )
            p2[n + 1, j] = a2 + dt * (
                -(cs[n, j] * d2) + g2[n, j] * a2 - 1j * m * sb[n, j] * a1 + sb[n, j] * f1[n, j]
            )
    return np.asarray(p1), np.asarray(p2)
