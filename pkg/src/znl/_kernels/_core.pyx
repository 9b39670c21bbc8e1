# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Mirrors znl._kernels._ref."""
import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, fabs, pow, sin

BACKEND = "cython"


def holder_sup(cnp.float64_t[::1] values, cnp.float64_t[::1] times, double alpha):
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t i, j
    cdef double best = 0.0, dv, dt, q
    for i in range(n - 1):
        for j in range(i + 1, n):
            dt = fabs(times[j] - times[i])
            if dt == 0.0:
                continue
            dv = fabs(values[j] - values[i])
            q = dv / pow(dt, alpha)
            if q > best:
                best = q
    return best


def phase_apply(cnp.complex128_t[::1] u, cnp.float64_t[::1] pot, double dt):
    """In place u *= exp(-1j * dt * pot) for real pot."""
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i
    cdef double ph, cr, ci, ur, ui
    for i in range(n):
        ph = -dt * pot[i]
        cr = cos(ph)
        ci = sin(ph)
        ur = u[i].real
        ui = u[i].imag
        u[i] = (ur * cr - ui * ci) + 1j * (ur * ci + ui * cr)


def abs2(cnp.complex128_t[::1] u):
    cdef Py_ssize_t n = u.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef cnp.float64_t[::1] o = out
    cdef Py_ssize_t i
    for i in range(n):
        o[i] = u[i].real * u[i].real + u[i].imag * u[i].imag
    return out


def gbm_path(cnp.float64_t[::1] dw_sum, double c_norm_sq, cnp.float64_t[::1] dt_steps):
    cdef Py_ssize_t n = dw_sum.shape[0]
    out = np.empty(n + 1, dtype=np.float64)
    cdef cnp.float64_t[::1] o = out
    cdef Py_ssize_t i
    cdef double h = 1.0
    o[0] = 1.0
    for i in range(n):
        h *= exp(-2.0 * dw_sum[i] - 2.0 * c_norm_sq * dt_steps[i])
        o[i + 1] = h
    return out
