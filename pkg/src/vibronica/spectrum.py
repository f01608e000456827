"""Spectrum containers and peak analysis."""
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit
from scipy.signal import find_peaks


@dataclass(frozen=True)
class SpectrumSeries:
    omega: np.ndarray
    values: np.ndarray
    source: str
    units: str = "rate"
    meta: dict = field(default_factory=dict)

    def normalized(self):
        """Copy scaled to unit maximum."""
        peak = np.max(self.values)
        return SpectrumSeries(self.omega, self.values / peak, self.source, "peak-normalized",
                              dict(self.meta))


def local_maxima(omega, values, min_rel_height=1e-4):
    """Grid positions of interior local maxima above a fraction of the global maximum."""
    values = np.asarray(values)
    idx, _ = find_peaks(values, height=min_rel_height * values.max())
    return np.asarray(omega)[idx], values[idx]


def nearest_peak(omega, values, center, window):
    """Grid position and value of the largest local maximum within center +- window."""
    omega = np.asarray(omega)
    values = np.asarray(values)
    idx, _ = find_peaks(values)
    idx = idx[np.abs(omega[idx] - center) <= window]
    if idx.size == 0:
        return None, None
    i = idx[np.argmax(values[idx])]
    return float(omega[i]), float(values[i])


def _lorentz(x, a, x0, k, c0, c1):
    return a * k / (k ** 2 + (x - x0) ** 2) + c0 + c1 * (x - x0)


def fit_lorentzian(omega, values, center, hwhm_guess, span=3.0):
    """Fit a Lorentzian plus a linear background near ``center``.

    Returns (center, hwhm). Only points within span * hwhm_guess are used,
    so neighbouring lines enter through the background terms.
    """
    omega = np.asarray(omega)
    values = np.asarray(values)
    sel = np.abs(omega - center) <= span * hwhm_guess
    x, y = omega[sel], values[sel]
    if x.size < 6:
        raise ValueError("too few grid points under the line to fit it")
    a0 = (y.max() - y.min()) * hwhm_guess
    popt, _ = curve_fit(_lorentz, x, y, p0=[a0, center, hwhm_guess, y.min(), 0.0],
                        maxfev=20000)
    return float(popt[1]), float(abs(popt[2]))


def fit_lorentzians(omega, values, centers, hwhm_guesses, shift=0.5):
    """Joint fit of one Lorentzian per line plus a constant background.

    Centers may move by ``shift`` and widths are free within (0, 5x guess),
    so overlapping wings of neighbouring lines are attributed to their own
    lines rather than to a background. Returns (centers, hwhms, areas).
    """
    omega = np.asarray(omega, dtype=float)
    values = np.asarray(values, dtype=float)
    c0 = np.asarray(centers, dtype=float)
    k0 = np.asarray(hwhm_guesses, dtype=float)
    n = c0.size
    scale = values.max()

    def model(x, *q):
        q = np.asarray(q)
        a, c, k = q[:n], q[n:2 * n], q[2 * n:3 * n]
        return (a[None, :] * k[None, :] / (k[None, :] ** 2 + (x[:, None] - c[None, :]) ** 2)).sum(1) + q[-1]

    amp0 = np.array([max(np.interp(c, omega, values), 1e-12) * k for c, k in zip(c0, k0)])
    p0 = np.concatenate([amp0 / scale, c0, k0, [0.0]])
    lo = np.concatenate([np.zeros(n), c0 - shift, k0 / 50, [-np.inf]])
    hi = np.concatenate([np.full(n, np.inf), c0 + shift, 5 * k0, [np.inf]])
    popt, _ = curve_fit(model, omega, values / scale, p0=p0, bounds=(lo, hi),
                        max_nfev=20000, x_scale="jac")
    return popt[n:2 * n], popt[2 * n:3 * n], popt[:n] * scale
