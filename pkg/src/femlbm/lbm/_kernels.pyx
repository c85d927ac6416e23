# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled lattice Boltzmann collision kernel.

Mirrors `femlbm.lbm.kernels_np.collide_ad` (same contract, same arithmetic
ordering per node) but runs the direction/node loops in C.
"""

import numpy as np

BACKEND = "compiled"


def collide_ad(double[:, ::1] f, const double[::1] w, const double[:, ::1] e,
               const double[:, ::1] vlat, double kappa, double inv_tau, bint half_vv):
    cdef Py_ssize_t m = f.shape[0]
    cdef Py_ssize_t N = f.shape[1]
    cdef Py_ssize_t dim = e.shape[1]
    cdef Py_ssize_t i, n, d
    cdef double c2 = 1.0 / kappa
    cdef double vvfac = 0.5 * c2 if half_vv else c2
    cdef double ev, feq

    u_arr = np.zeros(N)
    vv_arr = np.zeros(N)
    cdef double[::1] u = u_arr
    cdef double[::1] vv = vv_arr

    for i in range(m):
        for n in range(N):
            u[n] += f[i, n]
    for d in range(dim):
        for n in range(N):
            vv[n] += vlat[d, n] * vlat[d, n]
    for i in range(m):
        for n in range(N):
            ev = 0.0
            for d in range(dim):
                ev += e[i, d] * vlat[d, n]
            feq = w[i] * u[n] * (1.0 + ev * c2 + 0.5 * (ev * ev) * (c2 * c2)
                                 - vv[n] * vvfac)
            f[i, n] += inv_tau * (feq - f[i, n])
    return np.asarray(f)
