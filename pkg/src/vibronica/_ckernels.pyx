# cython: language_level=3
"""Compiled hot kernels. See _pykernels for the reference versions."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin

cnp.import_array()


def scaled_hermite(c, beta, int m_max):
    cdef double complex cc = complex(c)
    cdef double complex bb = complex(beta)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] h = np.zeros(m_max + 1, dtype=complex)
    cdef int n
    h[0] = 1.0
    if m_max >= 1:
        h[1] = cc
    for n in range(1, m_max):
        h[n + 1] = (cc * h[n] - 2.0 * sqrt(<double>n) * bb * h[n - 1]) / sqrt(<double>(n + 1))
    return h


def lorentzian_sum(x, weights, centers, widths):
    cdef double[::1] xs = np.ascontiguousarray(np.ravel(x), dtype=float)
    cdef double complex[::1] w = np.ascontiguousarray(weights, dtype=complex)
    cdef double[::1] c = np.ascontiguousarray(centers, dtype=float)
    cdef double[::1] k = np.ascontiguousarray(widths, dtype=float)
    cdef Py_ssize_t n = xs.shape[0], nm = w.shape[0], i, m
    out = np.empty(n, dtype=complex)
    cdef double complex[::1] res = out
    cdef double complex acc
    cdef double re, im, den
    for i in range(n):
        acc = 0
        for m in range(nm):
            # w / (k + i d) = w (k - i d) / (k^2 + d^2)
            re = k[m]
            im = c[m] - xs[i]
            den = re * re + im * im
            acc = acc + w[m] * (re - 1j * im) / den
        res[i] = acc
    return out.reshape(np.shape(x))


def weighted_fourier(values, double dt, omegas):
    cdef double complex[::1] v = np.ascontiguousarray(values, dtype=complex)
    cdef double[::1] om = np.ascontiguousarray(omegas, dtype=float)
    cdef Py_ssize_t n = v.shape[0], no = om.shape[0], i, k
    out = np.empty(no, dtype=complex)
    cdef double complex[::1] res = out
    cdef double complex acc, ph, rot
    cdef double a
    for i in range(no):
        a = om[i] * dt
        rot = cos(a) + 1j * sin(a)
        acc = 0
        ph = 1
        for k in range(n):
            # resynchronize the running phase to keep rounding drift negligible
            if k % 256 == 0:
                ph = cos(a * k) + 1j * sin(a * k)
            acc = acc + v[k] * ph
            ph = ph * rot
        res[i] = acc
    return out
