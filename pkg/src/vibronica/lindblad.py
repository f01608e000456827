"""Lindblad master-equation engine.

Superoperators act on column-stacked density matrices, vec(A X B) =
(B^T kron A) vec(X), and use the dissipator convention

    D[O] rho = rate * (2 O rho O^dag - O^dag O rho - rho O^dag O)

so a collapse at rate gamma empties a level at 2 gamma. Superoperators are
stored as scipy sparse matrices; every dense block that is factorized is
cut out of them.
"""
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.csgraph import breadth_first_order

from vibronica import kernels, numerics
from vibronica.errors import DegenerateSteadyStateError, NumericalError
from vibronica.fock import FockSpace, Operator, identity, tensor, two_level_sigma
from vibronica.model import (drive_hamiltonian, excitation_number, holstein_hamiltonian,
                             molecule_collapses, rotating_hamiltonian, vibrational_collapse)
from vibronica.spectrum import SpectrumSeries

_trtrs = sla.get_lapack_funcs("trtrs", (np.zeros(1, dtype=complex),))


class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator."""

    def __init__(self, op, basis_note="", check=True):
        if not isinstance(op, Operator):
            op = Operator(op)
        self.op = op
        self.basis_note = basis_note
        if check:
            self.check()

    @property
    def matrix(self):
        return self.op.matrix

    @property
    def dims(self):
        return self.op.dims

    def defects(self):
        m = self.matrix
        herm = np.abs(m - m.conj().T).max()
        tr = abs(np.trace(m) - 1)
        mineig = np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min()
        return herm, tr, mineig

    def check(self, herm_tol=1e-10, trace_tol=1e-9, pos_tol=1e-8):
        herm, tr, mineig = self.defects()
        if herm > herm_tol:
            raise NumericalError(f"density matrix not Hermitian (defect {herm:.2e})")
        if tr > trace_tol:
            raise NumericalError(f"density matrix trace off by {tr:.2e}")
        if mineig < -pos_tol:
            raise NumericalError(f"density matrix not positive (min eigenvalue {mineig:.2e})")
        return self

    def expect(self, A):
        return np.trace(getattr(A, "matrix", A) @ self.matrix)

    @classmethod
    def pure(cls, psi, dims=None, basis_note=""):
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(Operator(np.outer(psi, psi.conj()), dims), basis_note)


def vec(m):
    return np.asarray(getattr(m, "matrix", m)).ravel(order="F")


def unvec(v, d):
    return np.asarray(v).reshape((d, d), order="F")


@dataclass
class Liouvillian:
    superop: sp.csc_matrix
    collapses: list
    dims: tuple

    @property
    def d(self):
        return int(np.prod(self.dims))

    def dense(self):
        return self.superop.toarray()

    def trace_defect(self):
        """max |<<I| L|| : zero for a trace-preserving generator."""
        row = sp.csr_matrix(vec(np.eye(self.d)).conj())
        return float(np.abs((row @ self.superop).toarray()).max(initial=0.0))

    def __add__(self, other):
        return Liouvillian((self.superop + other.superop).tocsc(),
                           self.collapses + other.collapses, self.dims)


def _hamiltonian_part(H):
    d = H.shape[0]
    one = sp.identity(d, dtype=complex, format="csc")
    Hs = sp.csc_matrix(H)
    return -1j * (sp.kron(one, Hs) - sp.kron(Hs.T, one))


def build_liouvillian(H, collapses=()):
    """Generator of rho' = -i[H, rho] + sum rate (2 O rho O^dag - {O^dag O, rho})."""
    dims = H.dims
    d = H.shape[0]
    L = _hamiltonian_part(H.matrix)
    one = sp.identity(d, dtype=complex, format="csc")
    for op, rate in collapses:
        if op.dims != dims:
            raise ValueError(f"collapse operator dims {op.dims} differ from {dims}")
        if rate == 0:
            continue
        O = sp.csc_matrix(op.matrix)
        OdO = O.conj().T @ O
        L = L + rate * (2 * sp.kron(O.conj(), O) - sp.kron(one, OdO) - sp.kron(OdO.T, one))
    L = sp.csc_matrix(L)
    L.eliminate_zeros()
    return Liouvillian(L, list(collapses), dims)


@dataclass
class Trajectory:
    times: np.ndarray
    states: list

    def populations(self, P):
        return np.array([s.expect(P).real for s in self.states])


def evolve(L, rho0, t_end, tol=1e-10, n_snapshots=51):
    """Integrate rho' = L rho, returning validated snapshots on a uniform time grid."""
    if not isinstance(rho0, DensityMatrix):
        rho0 = DensityMatrix(rho0)
    rho0.check()
    d = L.d
    S = L.superop
    times = np.linspace(0.0, t_end, n_snapshots)
    traj = numerics.integrate_ode(lambda t, y: S @ y, vec(rho0.matrix), t_end, tol, t_eval=times)
    states = []
    for st in traj:
        m = unvec(st.y, d)
        herm, tr, mineig = DensityMatrix(m, check=False).defects()
        if mineig < -1e-6:
            raise NumericalError(f"positivity lost at t={st.t:.4g} (min eigenvalue {mineig:.2e}); "
                                 "tighten tol")
        states.append(DensityMatrix(Operator(m, rho0.dims), rho0.basis_note))
    return Trajectory(np.array([s.t for s in traj]), states)


def _trace_row_system(S, d):
    """Copy of S with the rho_00 row replaced by the trace functional."""
    A = sp.lil_matrix(S, dtype=complex)
    A[0, :] = vec(np.eye(d)).reshape(1, -1)
    return A.tocsc()


def steady_state(L, check_unique=None):
    """Unique null vector of L normalized to unit trace."""
    d = L.d
    A = _trace_row_system(L.superop, d)
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    if check_unique is None:
        check_unique = d * d <= 1600
    if check_unique:
        sv = sla.svdvals(L.dense())
        scale = max(sv[0], 1e-300)
        if sv[-2] < 1e-10 * scale:
            raise DegenerateSteadyStateError(
                "the Liouvillian has more than one stationary state; break the symmetry "
                "(add a drive or a decay channel)")
    with warnings.catch_warnings():
        warnings.simplefilter("error", spla.MatrixRankWarning)
        try:
            x = spla.splu(A).solve(rhs)
        except (RuntimeError, spla.MatrixRankWarning) as exc:
            raise DegenerateSteadyStateError(f"steady-state system is singular ({exc})") from exc
    rho = unvec(x, d)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    res = np.linalg.norm(L.superop @ vec(rho))
    if res > 1e-9:
        raise NumericalError(f"steady-state residual {res:.2e} exceeds 1e-9")
    return DensityMatrix(Operator(rho, L.dims), check=True)


def _reachable(S, start):
    """Indices reachable from ``start`` under repeated action of S (sparsity graph)."""
    G = sp.csr_matrix(abs(S.T))  # edge j -> i whenever S[i, j] != 0
    G.eliminate_zeros()
    seen = np.zeros(S.shape[0], dtype=bool)
    for s in np.atleast_1d(start):
        if not seen[s]:
            order = breadth_first_order(G, int(s), directed=True, return_predecessors=False)
            seen[order] = True
    return np.flatnonzero(seen)


class _Propagator:
    """Dense restriction of L to the subspace reachable from an initial vector."""

    def __init__(self, L, x0):
        support = np.flatnonzero(np.abs(x0) > 0)
        if support.size == 0:
            raise ValueError("initial vector is zero")
        self.idx = _reachable(L.superop, support)
        self.block = L.superop[self.idx][:, self.idx].toarray()
        self.x0 = x0[self.idx]

    def schur(self):
        if not hasattr(self, "_schur"):
            self._schur = sla.schur(self.block, output="complex")
        return self._schur


def _sample_uniform(P, a, x, n, chunk=512):
    """a . P^k x for k = 0..n-1, computed a chunk of rows a P^j at a time."""
    k = min(chunk, n)
    rows = np.empty((k, a.size), dtype=complex)
    rows[0] = a
    for j in range(1, k):
        rows[j] = rows[j - 1] @ P
    Pk = np.linalg.matrix_power(P, k)
    out = np.empty(n, dtype=complex)
    for start in range(0, n, k):
        stop = min(start + k, n)
        out[start:stop] = rows[:stop - start] @ x
        x = Pk @ x
    return out


@dataclass
class CorrelationSeries:
    taus: np.ndarray
    values: np.ndarray
    pair_note: str = ""


def two_time_correlation(L, A, B, rho_ref, taus, pair_note=""):
    """<A(tau) B(0)> = Tr[A exp(L tau)(B rho_ref)] on the grid ``taus``."""
    taus = np.asarray(taus, dtype=float)
    if np.any(taus < 0):
        raise ValueError("taus must be non-negative")
    rho = getattr(rho_ref, "matrix", rho_ref)
    x0 = vec(getattr(B, "matrix", B) @ rho)
    a = vec(getattr(A, "matrix", A).T)
    if not np.any(x0):
        return CorrelationSeries(taus, np.zeros(taus.size, dtype=complex), pair_note)
    prop = _Propagator(L, x0)
    a_r = a[prop.idx]
    vals = np.empty(taus.size, dtype=complex)
    steps = np.diff(taus)
    if taus.size > 1 and np.allclose(steps, steps[0], rtol=1e-8, atol=0) and steps[0] > 0:
        x = prop.x0.copy()
        if taus[0] > 0:
            x = numerics.expm(prop.block * taus[0]) @ x
        vals[:] = _sample_uniform(numerics.expm(prop.block * steps[0]), a_r, x, taus.size)
    else:
        for k, t in enumerate(taus):
            vals[k] = a_r @ (numerics.expm(prop.block * t) @ prop.x0)
    return CorrelationSeries(taus, vals, pair_note)


def resolvent_spectrum(L, A, X0, omegas):
    """Re int_0^inf Tr[A exp(L tau) X0] exp(i omega tau) d tau, exactly via -(L + i omega)^-1."""
    x0 = vec(getattr(X0, "matrix", X0))
    a = vec(getattr(A, "matrix", A).T)
    prop = _Propagator(L, x0)
    T, Z = prop.schur()
    y = Z.conj().T @ prop.x0
    c = a[prop.idx] @ Z
    n = T.shape[0]
    out = np.empty(len(omegas))
    for k, w in enumerate(omegas):
        Tw = T + 1j * w * np.eye(n)
        if np.abs(np.diag(Tw)).min() < 1e-14:
            raise NumericalError(f"resolvent is singular at omega={w}")
        out[k] = -(c @ sla.solve_triangular(Tw, y)).real
    return out


def _simpson_weights(n, dt):
    if n < 3 or n % 2 == 0:
        raise ValueError("Simpson quadrature needs an odd number >= 3 of samples")
    w = np.ones(n)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    return w * dt / 3


def fourier_halfline(values, dt, omegas):
    """Re-part-free half-line transform int_0^inf C(tau) exp(i omega tau) d tau.

    Composite Simpson on the sampled window plus an analytic tail
    C(T) / (s - i omega), with s fitted from the last two samples as the
    slowest complex decay rate.
    """
    values = np.asarray(values, dtype=complex)
    omegas = np.asarray(omegas, dtype=float)
    n = values.size
    w = _simpson_weights(n, dt)
    body = kernels.weighted_fourier(w * values, dt, omegas)
    tail = np.zeros(omegas.size, dtype=complex)
    if values[-1] != 0 and values[-2] != 0:
        s = -np.log(values[-1] / values[-2]) / dt
        if s.real > 0:
            T = (n - 1) * dt
            tail = values[-1] * np.exp(1j * omegas * T) / (s - 1j * omegas)
    return body + tail


def quadrature_spectrum(L, A, X0, omegas, envelope_tol=1e-10, accuracy=0.15):
    """Same quantity as resolvent_spectrum, from a sampled correlation function."""
    x0 = vec(getattr(X0, "matrix", X0))
    prop = _Propagator(L, x0)
    ev = np.linalg.eigvals(prop.block)
    rates = -ev.real
    rates = rates[rates > 1e-12]
    slow = rates.min()
    t_end = np.log(1 / envelope_tol) / slow
    f_max = np.abs(ev.imag).max() + np.abs(omegas).max()
    dt = accuracy / max(f_max, 1e-12)
    n = int(np.ceil(t_end / dt))
    n += 1 - n % 2
    taus = dt * np.arange(n)
    c = two_time_correlation(L, A, X0, np.eye(L.d), taus)
    return fourier_halfline(c.values, dt, omegas).real


class FrequencySweep:
    """Steady states of L0 + i w Q + L1 for many frame frequencies w.

    L0 must conserve the excitation-difference q = n(ket) - n(bra), which
    makes it block diagonal; ``charge`` gives n for every basis state. Each
    q-block is factorized once (Schur form for q != 0, LU with a trace row
    for q = 0) and the drive L1 is handled by the fixed-point iteration
    rho <- (L0 + i w Q)^-1 (-L1 rho), which converges geometrically for a
    weak drive. Otherwise, or if it stalls, a direct sparse solve is used.
    """

    def __init__(self, L0, L1, charge, tol=1e-13, max_iter=60):
        self.L0 = L0.superop.tocsr()
        self.L1 = L1.superop.tocsr()
        self.dims = L0.dims
        d = L0.d
        self.d = d
        n = np.asarray(charge)
        self.q = (n[:, None] - n[None, :]).ravel(order="F")
        coo = self.L0.tocoo()
        if np.any(self.q[coo.row] != self.q[coo.col]):
            raise ValueError("L0 mixes excitation-difference sectors")
        self.tol = tol
        self.max_iter = max_iter
        self.blocks = {}
        tr = vec(np.eye(d))
        for qv in np.unique(self.q):
            idx = np.flatnonzero(self.q == qv)
            blk = self.L0[idx][:, idx].toarray()
            if qv == 0:
                r0 = idx[np.flatnonzero(tr[idx])[0]]
                pos = int(np.flatnonzero(idx == r0)[0])
                blk[pos, :] = tr[idx]
                self.blocks[0] = (idx, pos, sla.lu_factor(blk))
            else:
                T, Z = sla.schur(blk, output="complex")
                self.blocks[int(qv)] = (idx, T, Z, np.ascontiguousarray(Z.conj().T))
        self.iterations = []

    def _shifted(self, w):
        """Per-block factors for frame frequency w (shifted Schur forms)."""
        out = {}
        for qv, blk in self.blocks.items():
            if qv == 0:
                out[0] = blk
            else:
                idx, T, Z, Zh = blk
                Tw = T.copy()
                Tw.flat[::Tw.shape[0] + 1] += 1j * w * qv
                out[qv] = (idx, Tw, Z, Zh)
        return out

    @staticmethod
    def _apply_inverse(factors, rhs):
        out = np.zeros_like(rhs)
        for qv, blk in factors.items():
            if qv == 0:
                idx, pos, lu = blk
                r = rhs[idx].copy()
                r[pos] = 1.0
                out[idx] = sla.lu_solve(lu, r)
            else:
                idx, Tw, Z, Zh = blk
                r = rhs[idx]
                if not r.any():
                    continue
                y, info = _trtrs(Tw, Zh @ r)
                if info != 0:
                    raise NumericalError("singular shifted block in the frequency sweep")
                out[idx] = Z @ y
        return out

    def full(self, w):
        Q = sp.diags(1j * w * self.q)
        return (self.L0 + Q + self.L1).tocsc()

    def solve(self, w):
        """vec(rho_ss) at frame frequency w."""
        fac = self._shifted(w)
        x = self._apply_inverse(fac, np.zeros(self.d * self.d, dtype=complex))
        prev = np.inf
        for it in range(self.max_iter):
            xn = self._apply_inverse(fac, -(self.L1 @ x))
            delta = np.abs(xn - x).max()
            x = xn
            if delta <= self.tol:
                break
            if delta > 0.9 * prev and it > 3:
                x = None
                break
            prev = delta
        else:
            x = None
        if x is None:
            self.iterations.append(-1)
            x = self._direct(w)
        else:
            self.iterations.append(it + 1)
        rho = unvec(x, self.d)
        rho = 0.5 * (rho + rho.conj().T)
        rho = rho / np.trace(rho).real
        v = vec(rho)
        res = np.abs(self.L0 @ v + 1j * w * self.q * v + self.L1 @ v).max()
        if res > 1e-9:
            raise NumericalError(f"steady-state residual {res:.2e} exceeds 1e-9 at w={w}")
        return rho

    def _direct(self, w):
        A = _trace_row_system(self.full(w), self.d)
        rhs = np.zeros(self.d * self.d, dtype=complex)
        rhs[0] = 1.0
        return spla.splu(A).solve(rhs)


# -- molecule-level helpers -------------------------------------------------

def molecule_liouvillian(p, n_fock=12, frame="rotating"):
    space = FockSpace(n_fock)
    H = rotating_hamiltonian(p, space) if frame == "rotating" else holstein_hamiltonian(p, space)
    return build_liouvillian(H, molecule_collapses(p, space))


def molecule_sweep(p, n_fock=12):
    """FrequencySweep for the driven molecule with frame frequency w = omega_l - omega_00."""
    space = FockSpace(n_fock)
    ref = p.replace(omega_l=p.omega_00, eta_l=0.0)
    L0 = build_liouvillian(rotating_hamiltonian(ref, space), molecule_collapses(p, space))
    L1 = Liouvillian(sp.csc_matrix(_hamiltonian_part(drive_hamiltonian(p, space).matrix)),
                     [], L0.dims)
    return FrequencySweep(L0, L1, excitation_number((2, n_fock)))


def sigma_op(n_fock):
    return tensor(two_level_sigma(), identity(n_fock))


def excited_vacuum(p, n_fock):
    """|e, 0_e>: lowest eigenvector of the excited-manifold block."""
    H = holstein_hamiltonian(p, FockSpace(n_fock)).matrix
    blk = H[n_fock:, n_fock:]
    w, v = np.linalg.eigh(blk)
    psi = np.zeros(2 * n_fock, dtype=complex)
    psi[n_fock:] = v[:, 0]
    return psi


def _grid_warning(omega, p):
    omega = np.asarray(omega)
    if omega.size > 1 and np.max(np.diff(omega)) > p.gamma:
        warnings.warn("frequency grid is coarser than the linewidth gamma", stacklevel=3)


def numeric_emission_spectrum(p, omega, n_fock=12, method="resolvent"):
    """Re int <sigma^dag(0) sigma(tau)> exp(i omega tau) d tau from |e, 0_e>, no drive.

    Returned in lineshape units (no eta_l^2 factor), the same units as
    analytic.lineshape(p, omega, 'emission').
    """
    p0 = p.replace(eta_l=0.0)
    omega = np.asarray(omega, dtype=float)
    _grid_warning(omega, p0)
    L = molecule_liouvillian(p0, n_fock, frame="lab")
    psi = excited_vacuum(p0, n_fock)
    s = sigma_op(n_fock).matrix
    X0 = np.outer(psi, psi.conj()) @ s.conj().T
    if method == "resolvent":
        vals = resolvent_spectrum(L, s, X0, omega)
    elif method == "quadrature":
        vals = quadrature_spectrum(L, s, X0, omega)
    else:
        raise ValueError(f"unknown method {method!r}")
    return SpectrumSeries(omega, vals, f"numeric-emission-{method}", "lineshape",
                          {"n_fock": n_fock})


def numeric_absorption_spectrum(p, omega_l, n_fock=12, method="population"):
    """Absorption lineshape: gamma p_e(omega_l) / eta_l^2 from steady states at weak drive.

    method='correlator' instead transforms <sigma(tau) sigma^dag(0)> taken in
    the undriven ground state (linear-response reference).
    """
    omega_l = np.asarray(omega_l, dtype=float)
    _grid_warning(omega_l, p)
    if method == "population":
        if p.eta_l <= 0 or p.eta_l / p.gamma > 0.1 + 1e-12:
            raise ValueError("population-scan absorption needs 0 < eta_l/gamma <= 0.1")
        sw = molecule_sweep(p, n_fock)
        Pe = np.kron(np.diag([0.0, 1.0]), np.eye(n_fock))
        pe = np.array([np.trace(Pe @ sw.solve(w - p.omega_00)).real for w in omega_l])
        if pe.max() > 0.1:
            warnings.warn("excited population exceeds 0.1: drive is saturating, reduce eta_l",
                          stacklevel=2)
        vals = p.gamma * pe / p.eta_l ** 2
    elif method == "correlator":
        p0 = p.replace(eta_l=0.0)
        L = molecule_liouvillian(p0, n_fock, frame="lab")
        g0 = np.zeros(2 * n_fock, dtype=complex)
        g0[0] = 1.0
        s = sigma_op(n_fock).matrix
        X0 = s.conj().T @ np.outer(g0, g0)
        vals = resolvent_spectrum(L, s, X0, omega_l)
    else:
        raise ValueError(f"unknown method {method!r}")
    return SpectrumSeries(omega_l, vals, f"numeric-absorption-{method}", "lineshape",
                          {"n_fock": n_fock})


def population_scan(p, omega_l, n_fock=12):
    """Steady excited population p_e over laser frequencies (any drive strength)."""
    sw = molecule_sweep(p, n_fock)
    Pe = np.kron(np.diag([0.0, 1.0]), np.eye(n_fock))
    return np.array([np.trace(Pe @ sw.solve(w - p.omega_00)).real for w in omega_l])


def vibrational_correlations(p, taus, n_fock=12):
    """<b_X(tau) b_Y^dag(0)> in the driven steady state for X, Y in {g, e}.

    b_g = P_g b and b_e = P_e (cosh r_s b + sinh r_s b^dag - r_d e^{r_s}), the
    two halves of the dressed collapse operator U b U^dag.
    """
    space = FockSpace(n_fock)
    L = molecule_liouvillian(p, n_fock)
    rho = steady_state(L)
    c = vibrational_collapse(p, space).matrix
    Pg = np.kron(np.diag([1.0, 0.0]), np.eye(n_fock))
    Pe = np.kron(np.diag([0.0, 1.0]), np.eye(n_fock))
    ops = {"g": Pg @ c, "e": Pe @ c}
    out = {}
    for x in "ge":
        for y in "ge":
            out[x + y] = two_time_correlation(L, ops[x], ops[y].conj().T, rho, taus,
                                              f"<b_{x}(tau) b_{y}^dag(0)>")
    return out, rho
