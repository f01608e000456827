"""Molecules in a driven optical cavity, weak-excitation (linear response) layer.

The analytic transmission follows from eliminating the molecular coherence
through its Laplace-domain response chi_ab; the numeric oracle solves the
full single-molecule master equation including the cavity mode.
"""
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from vibronica import kernels
from vibronica.analytic import _lines, chi
from vibronica.errors import NumericalError
from vibronica.fock import FockSpace
from vibronica.franck_condon import ABSORPTION
from vibronica.lindblad import FrequencySweep, Liouvillian, _hamiltonian_part, build_liouvillian
from vibronica.model import (cavity_collapses, cavity_hamiltonian, excitation_number,
                             photon_annihilator)
from vibronica.spectrum import local_maxima


def effective_rates(p, tail_tol=1e-10):
    """(Gamma_eff, Delta_eff) = (Re, Im) of 1/chi_ab at the laser frequency in p."""
    x = chi(p, ABSORPTION, tail_tol)
    if abs(x) < 1e-300:
        raise NumericalError("chi_ab vanishes; effective rates undefined")
    inv = 1 / x
    return inv.real, inv.imag


@dataclass(frozen=True)
class PolaritonPair:
    omega_plus: float
    omega_minus: float
    gamma_plus: float
    gamma_minus: float
    Gamma_eff: float
    Delta_eff: float


def polaritons(p, c, tail_tol=1e-10):
    """Polariton frequencies and half-widths at cavity resonance (omega_l = omega_c).

    Eigenvalues of the 2x2 drift matrix of (a, collective coherence):
    lambda = -(kappa + b)/2 +- sqrt((kappa - b)^2 - 4 N g^2)/2 with
    b = Gamma_eff + i Delta_eff. A mode exp(lambda t) appears in the
    transmission at omega_l - omega_c = -Im(lambda) with half-width -Re(lambda).
    """
    G, D = effective_rates(p.replace(omega_l=c.omega_c), tail_tol)
    b = G + 1j * D
    root = np.sqrt(complex((c.kappa - b) ** 2 - 4 * c.n_molecules * c.g ** 2))
    lam = np.array([-(c.kappa + b) / 2 + root / 2, -(c.kappa + b) / 2 - root / 2])
    om = -lam.imag
    ga = -lam.real
    hi, lo = (0, 1) if om[0] >= om[1] else (1, 0)
    return PolaritonPair(float(om[hi]), float(om[lo]), float(ga[hi]), float(ga[lo]), G, D)


@dataclass(frozen=True)
class TransmissionScan:
    omega_l: np.ndarray
    t_complex: np.ndarray
    source: str
    meta: dict = None

    @property
    def t_power(self):
        return np.abs(self.t_complex) ** 2


def chi_ab_scan(p, omega_l, tail_tol=1e-10):
    w, centers, widths, _ = _lines(p, ABSORPTION, tail_tol)
    return kernels.lorentzian_sum(np.asarray(omega_l, dtype=float), w, centers, widths)


def transmission_analytic(p, c, omega_l, tail_tol=1e-10):
    """T = sqrt(4 k1 k2) / (N g^2 chi_ab(omega_l) + kappa + i (omega_c - omega_l))."""
    omega_l = np.asarray(omega_l, dtype=float)
    x = chi_ab_scan(p, omega_l, tail_tol)
    t = (math.sqrt(4 * c.kappa1 * c.kappa2)
         / (c.n_molecules * c.g ** 2 * x + c.kappa + 1j * (c.omega_c - omega_l)))
    return TransmissionScan(omega_l, t, "analytic", {"n_molecules": c.n_molecules})


def cavity_sweep(p, c, photon_dim=4, vib_dim=10):
    """FrequencySweep over omega_l - omega_c for the single-molecule cavity."""
    if photon_dim < 3:
        raise ValueError("photon_dim must be >= 3 (vacuum, one photon and an overflow level)")
    vib = FockSpace(vib_dim)
    ph = FockSpace(photon_dim)
    pr = p.replace(omega_l=c.omega_c, eta_l=0.0)
    H0 = cavity_hamiltonian(pr, c.replace(eta_c=0.0), vib, ph)
    L0 = build_liouvillian(H0, cavity_collapses(pr, c, vib, ph))
    a = photon_annihilator(vib, ph).matrix
    Hd = 1j * c.eta_c * (a.conj().T - a)
    L1 = Liouvillian(sp.csc_matrix(_hamiltonian_part(Hd)), [], L0.dims)
    return FrequencySweep(L0, L1, excitation_number(L0.dims)), a


def transmission_numeric(p, c, omega_l, photon_dim=4, vib_dim=10):
    """Transmission from the full master-equation steady state at each omega_l."""
    if c.n_molecules != 1:
        raise ValueError("the numeric cavity oracle handles a single molecule only")
    if c.eta_c / c.kappa > 0.01:
        raise ValueError("transmission_numeric assumes a weak probe, eta_c/kappa <= 0.01")
    omega_l = np.asarray(omega_l, dtype=float)
    sw, a = cavity_sweep(p, c, photon_dim, vib_dim)
    amp = np.array([np.trace(a @ sw.solve(w - c.omega_c)) for w in omega_l])
    t = 2 * math.sqrt(c.kappa1 * c.kappa2) * amp / c.eta_c
    return TransmissionScan(omega_l, t, "numeric",
                            {"photon_dim": photon_dim, "vib_dim": vib_dim,
                             "iterations": list(sw.iterations)})


def polariton_peaks(scan):
    """(lower, upper) polariton peaks as ((omega, |T|^2), (omega, |T|^2)).

    The two highest local maxima of |T|^2 are taken, ordered in frequency.
    """
    om, h = local_maxima(scan.omega_l, scan.t_power, min_rel_height=0.0)
    if om.size < 2:
        raise NumericalError("fewer than two transmission peaks in the scan")
    top = np.sort(np.argsort(h)[-2:])
    return (om[top[0]], h[top[0]]), (om[top[1]], h[top[1]])


def numeric_linewidth(scan, center):
    """Full width at half maximum of the |T|^2 peak nearest ``center`` (grid estimate)."""
    om = scan.omega_l
    y = scan.t_power
    i = int(np.argmin(np.abs(om - center)))
    half = y[i] / 2
    lo = i
    while lo > 0 and y[lo] > half:
        lo -= 1
    hi = i
    while hi < y.size - 1 and y[hi] > half:
        hi += 1
    return float(om[hi] - om[lo])


def transmission_map(p, c, omega_l, n_values, tail_tol=1e-10):
    """|T|^2 for every N in n_values (rows) and omega_l (columns)."""
    return np.array([transmission_analytic(p, c.replace(n_molecules=int(n)), omega_l,
                                           tail_tol).t_power for n in n_values])
