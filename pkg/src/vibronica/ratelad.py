"""Per-sublevel rate-equation ladder.

Populations p_m^e and p_m^g of the vibrational sublevels of both
electronic states evolve under the flows

    g_0 -> e_m        at 2 up_m         (laser pump into sublevel m)
    e_{m+1} -> e_m    at Gamma          (vibrational cascade)
    g_{m+1} -> g_m    at Gamma
    e_0 -> g_m        at 2 down_m + 2 gamma_m,   gamma_m = gamma S_m^em

The generator is assembled from these flows column by column, so every
column sums to zero and total probability is conserved exactly.
"""
from dataclasses import dataclass

import numpy as np

from vibronica import numerics
from vibronica.analytic import rates
from vibronica.franck_condon import ABSORPTION, EMISSION, fc_series


@dataclass(frozen=True)
class LadderState:
    p_e: np.ndarray
    p_g: np.ndarray

    @property
    def m_max(self):
        return self.p_e.size - 1

    @property
    def vector(self):
        return np.concatenate([self.p_e, self.p_g])

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=float)
        n = v.size // 2
        return cls(v[:n].copy(), v[n:].copy())

    @classmethod
    def ground(cls, m_max):
        pg = np.zeros(m_max + 1)
        pg[0] = 1.0
        return cls(np.zeros(m_max + 1), pg)

    def check(self, tol=1e-9):
        v = self.vector
        if v.min() < -tol or v.max() > 1 + tol:
            raise ValueError("ladder populations must lie in [0, 1]")
        if abs(v.sum() - 1) > tol:
            raise ValueError("ladder populations must sum to 1")
        return self


def ladder_size(p, tail_tol=1e-10):
    return max(fc_series(p, EMISSION, tail_tol).m_max, fc_series(p, ABSORPTION, tail_tol).m_max)


def ladder_generator(p, m_max=None, tail_tol=1e-10):
    """Rate matrix K with dp/dt = K p on [p_e(0..M), p_g(0..M)]."""
    M = ladder_size(p, tail_tol) if m_max is None else int(m_max)
    n = M + 1
    r = rates(p, tail_tol=tail_tol)
    up = np.zeros(n)
    down = np.zeros(n)
    k = min(n, r.up.size)
    up[:k] = r.up[:k]
    k = min(n, r.down.size)
    down[:k] = r.down[:k]
    sem = np.zeros(n)
    w = fc_series(p, EMISSION, tail_tol).weights
    sem[:min(n, w.size)] = w[:n]
    K = np.zeros((2 * n, 2 * n))

    def flow(src, dst, rate):
        K[dst, src] += rate
        K[src, src] -= rate

    e = lambda m: m
    g = lambda m: n + m
    for m in range(n):
        flow(g(0), e(m), 2 * up[m])
        flow(e(0), g(m), 2 * down[m] + 2 * p.gamma * sem[m])
    for m in range(M):
        flow(e(m + 1), e(m), p.Gamma)
        flow(g(m + 1), g(m), p.Gamma)
    np.fill_diagonal(K, 0.0)
    np.fill_diagonal(K, -K.sum(axis=0))
    return K


def ladder_evolve(p, init, t, tail_tol=1e-10):
    """LadderState at each time in ``t`` (exact exponential propagation)."""
    K = ladder_generator(p, init.m_max, tail_tol)
    v0 = init.vector
    out = []
    for tk in np.asarray(t, dtype=float):
        v = (numerics.expm(K * tk) @ v0).real
        out.append(LadderState.from_vector(v))
    return out


def ladder_steady_state(p, m_max=None, tail_tol=1e-10):
    K = ladder_generator(p, m_max, tail_tol)
    A = K.astype(complex)
    A[0, :] = 1.0
    rhs = np.zeros(K.shape[0], dtype=complex)
    rhs[0] = 1.0
    v = numerics.solve_linear(A, rhs).real
    return LadderState.from_vector(np.clip(v, 0.0, None) / np.clip(v, 0.0, None).sum())
