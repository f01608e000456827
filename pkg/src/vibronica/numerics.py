"""Dense complex linear algebra and integration helpers.

Thin, checked wrappers over numpy/scipy. Everything else in the package
goes through these so that dimension and finiteness errors surface early
with a useful message.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.integrate import solve_ivp

from vibronica.errors import NumericalError, SingularMatrixError, StiffnessError


def _finite(m, what):
    if not np.all(np.isfinite(m)):
        raise NumericalError(f"{what}: result contains NaN or Inf")
    return m


def _square(m, what):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{what}: expected a square matrix, got shape {m.shape}")
    return m


def matmul(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul: shapes {a.shape} and {b.shape} do not conform")
    return _finite(a @ b, "matmul")


def expm(m, structure="auto"):
    """Matrix exponential.

    Hermitian and anti-Hermitian inputs go through an eigendecomposition,
    which keeps exp(anti-Hermitian) unitary to rounding. Everything else
    uses scipy's scaling-and-squaring Pade(13).
    """
    m = _square(m, "expm")
    if not np.all(np.isfinite(m)):
        raise ValueError("expm: input is not finite")
    if structure == "auto":
        scale = max(np.abs(m).max(initial=0.0), 1e-300)
        mh = m.conj().T
        if np.abs(m + mh).max(initial=0.0) <= 1e-14 * scale:
            structure = "antihermitian"
        elif np.abs(m - mh).max(initial=0.0) <= 1e-14 * scale:
            structure = "hermitian"
        else:
            structure = "general"
    with np.errstate(over="ignore", invalid="ignore"):
        if structure == "antihermitian":
            w, v = np.linalg.eigh(-1j * m)
            out = (v * np.exp(1j * w)) @ v.conj().T
        elif structure == "hermitian":
            w, v = np.linalg.eigh(m)
            out = (v * np.exp(w)) @ v.conj().T
        else:
            out = sla.expm(m)
    if not np.all(np.isfinite(out)):
        raise NumericalError("expm overflowed; rescale the generator (e.g. shorter time step)")
    return out


def eig_hermitian(m, tol=1e-10):
    """Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix."""
    m = _square(m, "eig_hermitian")
    scale = max(1.0, np.abs(m).max(initial=0.0))
    if np.abs(m - m.conj().T).max(initial=0.0) > tol * scale:
        raise ValueError("eig_hermitian: matrix is not Hermitian")
    w, v = np.linalg.eigh(m)
    return w, v


def solve_linear(a, rhs, rcond_min=1e-14):
    """Solve a x = rhs by LU, refusing near-singular systems."""
    a = _square(a, "solve_linear")
    rhs = np.asarray(rhs)
    if rhs.shape[0] != a.shape[0]:
        raise ValueError("solve_linear: right-hand side has the wrong length")
    dtype = np.result_type(a, rhs, np.complex128)
    a = a.astype(dtype)
    lu, piv, info = sla.lapack.zgetrf(a)
    if info > 0:
        raise SingularMatrixError("solve_linear: matrix is exactly singular")
    anorm = np.abs(a).sum(axis=0).max()
    rcond, _ = sla.lapack.zgecon(lu, anorm, norm="1")
    if rcond < rcond_min:
        raise SingularMatrixError(
            f"solve_linear: matrix is ill-conditioned (condition ~ {1 / max(rcond, 1e-300):.3g})",
            condition=1 / max(rcond, 1e-300))
    x, info = sla.lapack.zgetrs(lu, piv, rhs.astype(dtype))
    res = np.linalg.norm(a @ x - rhs) / max(np.linalg.norm(rhs), 1e-300)
    if res > 1e-10:
        raise SingularMatrixError(f"solve_linear: residual {res:.3g} too large",
                                  condition=1 / rcond)
    return x


@dataclass(frozen=True)
class OdeState:
    t: float
    y: np.ndarray
    step: float


class _Budget(Exception):
    pass


def integrate_ode(f, y0, t_end, tol=1e-8, t_eval=None, max_steps=200_000):
    """Adaptive Dormand-Prince 4(5) integration of y' = f(t, y) from t=0.

    Returns the list of OdeState at the integrator's accepted steps, or at
    ``t_eval`` if given. ``step`` is the spacing to the next reported time.
    An explicit method needs ever smaller steps on a stiff problem, so more
    than ``max_steps`` steps (six evaluations each) is reported as stiffness.
    """
    if not 1e-12 <= tol <= 1e-4:
        raise ValueError("integrate_ode: tol must lie in [1e-12, 1e-4]")
    y0 = np.asarray(y0, dtype=complex)
    calls = [0]

    def counted(t, y):
        calls[0] += 1
        if calls[0] > 6 * max_steps:
            raise _Budget
        return f(t, y)

    try:
        sol = solve_ivp(counted, (0.0, float(t_end)), y0, method="RK45", rtol=tol,
                        atol=tol * max(1e-3, np.abs(y0).max(initial=0.0) * 1e-3),
                        t_eval=t_eval, dense_output=False)
    except _Budget:
        raise StiffnessError(f"integrate_ode: step size collapsed (more than {max_steps} steps "
                             f"before t={t_end}); the problem is likely stiff") from None
    if sol.status < 0:
        raise StiffnessError(f"integrate_ode failed ({sol.message}); the problem is likely stiff")
    ts = sol.t
    if ts.size > 1:
        steps = np.diff(ts, append=ts[-1] + (ts[-1] - ts[-2]))
    else:
        steps = np.full(ts.size, max(float(t_end), 1e-300))
    steps = np.where(steps > 0, steps, 1e-300)
    return [OdeState(float(t), sol.y[:, i], float(h)) for i, (t, h) in enumerate(zip(ts, steps))]


def hermite_sequence(x, m_max):
    """Physicists' Hermite polynomials H_0(x)..H_{m_max}(x)."""
    if not 0 <= m_max <= 200:
        raise ValueError("hermite_sequence: m_max must lie in [0, 200]")
    x = complex(x)
    h = np.zeros(m_max + 1, dtype=complex)
    h[0] = 1.0
    if m_max >= 1:
        h[1] = 2 * x
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, m_max):
            h[n + 1] = 2 * x * h[n] - 2 * n * h[n - 1]
    if not np.all(np.isfinite(h)):
        raise NumericalError("hermite_sequence overflowed; use the scaled (log-domain) recurrence")
    return h
