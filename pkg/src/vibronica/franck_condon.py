"""Closed-form Franck-Condon factors for displaced-squeezed excited states.

With alpha = 1 + tanh r_s, alpha' = tanh r_s - 1 and beta = tanh(r_s)/2,

    S_m^em = exp(-alpha r_d^2) / cosh r_s * |h_m(alpha r_d, beta)|^2
    S_m^ab = exp(alpha' r_d^2 e^{2 r_s}) / cosh r_s * (-1)^m h_m(-i alpha' r_d e^{r_s}, beta)^2

where h_m(c, beta) = beta^{m/2} H_m(c / (2 sqrt beta)) / sqrt(m!) is produced by a
scaled three-term recurrence. The scaling absorbs beta^m/m! so nothing
overflows, and beta = 0 (equal curvatures) reduces to the Poisson weights
without a special case.
"""
import math
from dataclasses import dataclass

import numpy as np

from vibronica import kernels
from vibronica.errors import NumericalError

M_LIMIT = 200
EMISSION = "emission"
ABSORPTION = "absorption"


def _kind(kind):
    k = str(kind).lower()
    if k in ("em", "emission"):
        return EMISSION
    if k in ("ab", "abs", "absorption"):
        return ABSORPTION
    raise ValueError(f"unknown kind {kind!r}; use 'emission' or 'absorption'")


def fc_weights(p, kind, m_max):
    """S_0..S_{m_max} for the given transition kind."""
    kind = _kind(kind)
    if abs(p.r_s) >= 1.5:
        raise ValueError("|r_s| must be below 1.5")
    t = math.tanh(p.r_s)
    beta = t / 2
    pref = 1 / math.cosh(p.r_s)
    if kind == EMISSION:
        a = 1 + t
        h = kernels.scaled_hermite(a * p.r_d, beta, m_max)
        w = math.exp(-a * p.r_d ** 2) * pref * np.abs(h) ** 2
    else:
        a = t - 1
        h = kernels.scaled_hermite(-1j * a * p.r_d * math.exp(p.r_s), beta, m_max)
        sign = np.where(np.arange(m_max + 1) % 2, -1.0, 1.0)
        z = math.exp(a * p.r_d ** 2 * math.exp(2 * p.r_s)) * pref * sign * h ** 2
        scale = max(1.0, np.abs(z).max())
        if np.abs(z.imag).max() > 1e-10 * scale:
            raise NumericalError("absorption weights picked up an imaginary part")
        w = z.real
    if np.any(w < -1e-12):
        raise NumericalError("negative Franck-Condon weight")
    return np.clip(w, 0.0, None)


def fc_emission(p, m):
    return float(fc_weights(p, EMISSION, m)[m])


def fc_absorption(p, m):
    return float(fc_weights(p, ABSORPTION, m)[m])


@dataclass(frozen=True)
class FcSeries:
    kind: str
    weights: np.ndarray
    m_max: int
    params: object
    tail_tol: float

    @property
    def total(self):
        return float(self.weights.sum())


def _auto_m(w, tail_tol):
    cum = np.cumsum(w)
    ok = (cum >= 1 - tail_tol) & (w < tail_tol)
    idx = np.flatnonzero(ok)
    return int(idx[0]) if idx.size else None


def fc_series(p, kind, tail_tol=1e-10):
    """Weights up to the smallest M with sum >= 1 - tail_tol and S_M < tail_tol."""
    if not 1e-14 <= tail_tol <= 1e-6:
        raise ValueError("tail_tol must lie in [1e-14, 1e-6]")
    kind = _kind(kind)
    n = 32
    while True:
        w = fc_weights(p, kind, n)
        m = _auto_m(w, tail_tol)
        if m is not None:
            return FcSeries(kind, w[:m + 1].copy(), m, p, tail_tol)
        if n >= M_LIMIT:
            raise NumericalError(f"Franck-Condon series needs more than {M_LIMIT} terms; "
                                 "parameters are too extreme")
        n = min(2 * n, M_LIMIT)


def correlator_F(kind, nu, t, p, tail_tol=1e-10):
    """F(nu, t) = sum_m S_m exp(-m (i nu + Gamma) t)."""
    if t < 0:
        raise ValueError("t must be non-negative")
    s = fc_series(p, kind, tail_tol)
    m = np.arange(s.m_max + 1)
    return complex(np.sum(s.weights * np.exp(-m * (1j * nu + p.Gamma) * t)))
