"""Pure-Python (numpy) versions of the hot kernels.

Same signatures and semantics as the compiled module; used when the
extension is unavailable or VIBRONICA_PURE_PYTHON is set.
"""
import math

import numpy as np


def scaled_hermite(c, beta, m_max):
    """h_m = beta**(m/2) H_m(c / (2 sqrt(beta))) / sqrt(m!) for m = 0..m_max.

    The scaled recurrence stays finite for beta -> 0, where h_m -> c**m/sqrt(m!).
    """
    c = complex(c)
    beta = complex(beta)
    h = np.zeros(m_max + 1, dtype=complex)
    h[0] = 1.0
    if m_max >= 1:
        h[1] = c
    for n in range(1, m_max):
        h[n + 1] = (c * h[n] - 2.0 * math.sqrt(n) * beta * h[n - 1]) / math.sqrt(n + 1)
    return h


def lorentzian_sum(x, weights, centers, widths):
    """sum_m weights[m] / (widths[m] + i (centers[m] - x)) at every x."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(weights, dtype=complex)
    c = np.asarray(centers, dtype=float)
    k = np.asarray(widths, dtype=float)
    out = np.empty(x.shape, dtype=complex)
    step = max(1, 2**20 // max(1, w.size))
    flat = x.ravel()
    res = out.ravel()
    for i in range(0, flat.size, step):
        xs = flat[i:i + step, None]
        res[i:i + step] = (w / (k + 1j * (c - xs))).sum(axis=1)
    return out


def weighted_fourier(values, dt, omegas):
    """sum_k values[k] exp(i omega k dt) for every omega."""
    v = np.asarray(values, dtype=complex)
    om = np.asarray(omegas, dtype=float)
    t = dt * np.arange(v.size)
    out = np.empty(om.size, dtype=complex)
    step = max(1, 2**22 // max(1, v.size))
    for i in range(0, om.size, step):
        out[i:i + step] = np.exp(1j * np.outer(om[i:i + step], t)) @ v
    return out
