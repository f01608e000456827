"""Closed-form response functions, rates, populations and spectra.

Conventions (frequencies relative to nothing in particular; Delta = omega_00 - omega_l):

    G_em(s) = sum_m S_m^em / (s + gamma + m Gamma + i (Delta - m nu_g))
    G_ab(s) = sum_m S_m^ab / (s + gamma + m Gamma + i (Delta + m nu_e))

Rates are Lorentzian-weighted Franck-Condon factors scaled by eta_l^2.
"""
import warnings
from dataclasses import dataclass

import numpy as np

from vibronica import kernels
from vibronica.errors import NumericalError
from vibronica.franck_condon import ABSORPTION, EMISSION, _kind, fc_series
from vibronica.spectrum import SpectrumSeries


def _lines(p, kind, tail_tol):
    """(weights, centers, widths, m_max) of the Lorentzian lines of one kind."""
    kind = _kind(kind)
    s = fc_series(p, kind, tail_tol)
    m = np.arange(s.m_max + 1)
    if kind == EMISSION:
        centers = p.omega_00 - m * p.nu_g
    else:
        centers = p.omega_00 + m * p.nu_e
    return s.weights, centers, p.gamma + m * p.Gamma, s.m_max


def response_G(p, kind, s=0.0, tail_tol=1e-10):
    """Laplace-domain response G_em(s) or G_ab(s) at the laser frequency p.omega_l."""
    s = complex(s)
    if s.real < 0:
        raise ValueError("response_G needs Re(s) >= 0")
    w, centers, widths, _ = _lines(p, kind, tail_tol)
    den = s + widths + 1j * (centers - p.omega_l)
    small = np.abs(den) < 1e-14
    if np.any(small & (w > 0)):
        m = int(np.flatnonzero(small & (w > 0))[0])
        raise NumericalError(f"response_G hits the pole of term m={m}")
    return complex(np.sum(w / den))


@dataclass(frozen=True)
class ResponseFunctions:
    params: object
    tail_tol: float
    chi_ab: complex
    chi_em: complex

    def G_ab(self, s):
        return response_G(self.params, ABSORPTION, s, self.tail_tol)

    def G_em(self, s):
        return response_G(self.params, EMISSION, s, self.tail_tol)


def response_functions(p, tail_tol=1e-10):
    return ResponseFunctions(p, tail_tol, response_G(p, ABSORPTION, 0, tail_tol),
                             response_G(p, EMISSION, 0, tail_tol))


def chi(p, kind, tail_tol=1e-10):
    """s -> 0 limit of the response function."""
    return response_G(p, kind, 0.0, tail_tol)


@dataclass(frozen=True)
class RateTable:
    up: np.ndarray
    down: np.ndarray
    omega: float

    @property
    def total_up(self):
        return float(self.up.sum())

    @property
    def total_down(self):
        return float(self.down.sum())


def _rate_terms(p, kind, omega, tail_tol):
    w, centers, widths, _ = _lines(p, kind, tail_tol)
    return p.eta_l ** 2 * w * widths / (widths ** 2 + (centers - omega) ** 2)


def rates(p, omega=None, tail_tol=1e-10):
    """Pump (up) and stimulated-emission (down) rates per vibrational sublevel."""
    omega = p.omega_l if omega is None else float(omega)
    return RateTable(_rate_terms(p, ABSORPTION, omega, tail_tol),
                     _rate_terms(p, EMISSION, omega, tail_tol), omega)


def steady_population(p, tail_tol=1e-10):
    """Excited-state population sum(up) / (gamma + sum(up + down))."""
    r = rates(p, tail_tol=tail_tol)
    den = p.gamma + r.total_up + r.total_down
    if den == 0:
        return 0.0
    return r.total_up / den


def rate_equation_evolve(p, p_e0, t, tail_tol=1e-10):
    """Solution of p_e' = 2 U (1 - p_e) - 2 (gamma + D) p_e at the times ``t``.

    U and D are the summed up/down rates. Closed form; see
    rate_equation_rhs for an integrator cross-check.
    """
    if not 0 <= p_e0 <= 1:
        raise ValueError("p_e0 must lie in [0, 1]")
    r = rates(p, tail_tol=tail_tol)
    k = 2 * (r.total_up + p.gamma + r.total_down)
    t = np.asarray(t, dtype=float)
    if k == 0:
        return np.full(t.shape, float(p_e0))
    fixed = 2 * r.total_up / k
    return fixed + (p_e0 - fixed) * np.exp(-k * t)


def rate_equation_rhs(p, tail_tol=1e-10):
    r = rates(p, tail_tol=tail_tol)
    up, down = r.total_up, r.total_down

    def f(t, y):
        return 2 * up * (1 - y) - 2 * (p.gamma + down) * y
    return f


def relaxation_rate(p, tail_tol=1e-10):
    r = rates(p, tail_tol=tail_tol)
    return 2 * (p.gamma + r.total_up + r.total_down)


def lineshape(p, omega, kind, tail_tol=1e-10):
    """sum_m S_m w_m / (w_m^2 + (c_m - omega)^2): the spectra without the eta_l^2 factor."""
    w, centers, widths, _ = _lines(p, kind, tail_tol)
    omega = np.asarray(omega, dtype=float)
    return kernels.lorentzian_sum(omega, w, centers, widths).real


def _check_cover(p, omega, kind, tail_tol):
    w, centers, _, _ = _lines(p, kind, tail_tol)
    strong = centers[w > 1e-3]
    if strong.size and (strong.min() < np.min(omega) or strong.max() > np.max(omega)):
        warnings.warn(f"{kind} grid does not cover all lines with weight > 1e-3", stacklevel=3)


def _spectrum(p, omega, kind, normalize, tail_tol):
    omega = np.asarray(omega, dtype=float)
    _check_cover(p, omega, kind, tail_tol)
    vals = p.eta_l ** 2 * lineshape(p, omega, kind, tail_tol)
    m_max = fc_series(p, kind, tail_tol).m_max
    s = SpectrumSeries(omega, vals, f"analytic-{kind}", "rate", {"m_max": m_max})
    return s.normalized() if normalize else s


def analytic_emission_spectrum(p, omega, normalize=False, tail_tol=1e-10):
    """Summed down rates at each frequency of the grid."""
    return _spectrum(p, omega, EMISSION, normalize, tail_tol)


def analytic_absorption_spectrum(p, omega, normalize=False, tail_tol=1e-10):
    """Summed up rates at each frequency of the grid."""
    return _spectrum(p, omega, ABSORPTION, normalize, tail_tol)


def steady_population_scan(p, omega_l, tail_tol=1e-10):
    """steady_population over a grid of laser frequencies (vectorized)."""
    omega_l = np.asarray(omega_l, dtype=float)
    up = p.eta_l ** 2 * lineshape(p, omega_l, ABSORPTION, tail_tol)
    down = p.eta_l ** 2 * lineshape(p, omega_l, EMISSION, tail_tol)
    den = p.gamma + up + down
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(den > 0, up / np.where(den > 0, den, 1.0), 0.0)
