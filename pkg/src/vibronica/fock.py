"""Truncated Fock spaces, bosonic and two-level operators.

Basis conventions: Fock states |0>..|N-1>; for the two-level system index 0
is |g> and index 1 is |e>. In tensor products the electronic factor comes
first (photon, electron, vibration for the cavity).
"""
from dataclasses import dataclass
from functools import reduce

import numpy as np

from vibronica import numerics
from vibronica.errors import TruncationError

DEFAULT_ORACLE_DIM = 64
DEFAULT_DYNAMICS_DIM = 12


@dataclass(frozen=True)
class FockSpace:
    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError("FockSpace needs an integer dim >= 2")


class Operator:
    """Dense complex matrix tagged with its tensor-factor dimensions."""

    __array_priority__ = 100

    def __init__(self, matrix, dims=None):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"Operator needs a square matrix, got {m.shape}")
        dims = (m.shape[0],) if dims is None else tuple(int(d) for d in dims)
        if int(np.prod(dims)) != m.shape[0]:
            raise ValueError(f"factor dims {dims} do not match matrix size {m.shape[0]}")
        m.setflags(write=False)
        self.matrix = m
        self.dims = dims

    @property
    def shape(self):
        return self.matrix.shape

    def dag(self):
        return Operator(self.matrix.conj().T, self.dims)

    def _other(self, other):
        if isinstance(other, Operator):
            if other.dims != self.dims:
                raise ValueError(f"factor dims differ: {self.dims} vs {other.dims}")
            return other.matrix
        return None

    def __matmul__(self, other):
        m = self._other(other)
        if m is None:
            return self.matrix @ other
        return Operator(numerics.matmul(self.matrix, m), self.dims)

    def __add__(self, other):
        m = self._other(other)
        if m is None:
            if np.isscalar(other):
                return Operator(self.matrix + other * np.eye(self.shape[0]), self.dims)
            return NotImplemented
        return Operator(self.matrix + m, self.dims)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1) * other

    def __rsub__(self, other):
        return (-1) * self + other

    def __neg__(self):
        return Operator(-self.matrix, self.dims)

    def __mul__(self, k):
        if not np.isscalar(k):
            return NotImplemented
        return Operator(k * self.matrix, self.dims)

    __rmul__ = __mul__

    def __truediv__(self, k):
        return Operator(self.matrix / k, self.dims)

    def __repr__(self):
        return f"Operator(dims={self.dims})"

    def is_hermitian(self, tol=1e-12):
        return np.abs(self.matrix - self.matrix.conj().T).max() <= tol

    def expect(self, rho):
        rho = getattr(rho, "matrix", rho)
        return np.trace(self.matrix @ rho)


def identity(dims):
    dims = (dims,) if np.isscalar(dims) else tuple(dims)
    return Operator(np.eye(int(np.prod(dims))), dims)


def annihilator(space):
    n = space.dim
    return Operator(np.diag(np.sqrt(np.arange(1, n)), 1))


def number(space):
    return Operator(np.diag(np.arange(space.dim, dtype=float)))


def position(space):
    """b + b^dagger."""
    b = annihilator(space)
    return b + b.dag()


def _generator(dim, kind, r):
    b = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
    bd = b.conj().T
    if kind == "displacement":
        return r * (bd - b)
    return 0.5 * r * (b @ b - bd @ bd)


def _truncated_unitary(dim, kind, r):
    """exp(generator) on dim levels, checked against the same map on 2*dim levels.

    The exponential of a truncated anti-Hermitian generator is exactly unitary,
    so the defect that matters is how far the images of the low-lying states
    (the lowest quarter) depart from the untruncated operator on the lower half
    of the space. It is measured against the doubled space.
    """
    u = numerics.expm(_generator(dim, kind, r))
    ref = numerics.expm(_generator(2 * dim, kind, r))
    h = dim // 2
    q = max(1, dim // 4)
    defect = np.abs(u[:h, :q] - ref[:h, :q]).max()
    if defect > 1e-8:
        raise TruncationError(f"{kind}: unitarity defect {defect:.2e} on the lower half; "
                              "increase the Fock dimension")
    return u


def displacement(space, r_d):
    """D(r) = exp(r (b^dagger - b)) on the truncated space."""
    if abs(r_d) > 5:
        raise ValueError("displacement: |r_d| > 5 needs a larger bespoke dimension")
    return Operator(_truncated_unitary(space.dim, "displacement", r_d))


def squeezing(space, r_s):
    """S(r) = exp(r (b^2 - b^dagger^2) / 2) on the truncated space."""
    if abs(r_s) > 1.5:
        raise ValueError("squeezing: |r_s| > 1.5 is outside the supported range")
    return Operator(_truncated_unitary(space.dim, "squeezing", r_s))


def tensor(*ops):
    if len(ops) == 1 and isinstance(ops[0], (list, tuple)):
        ops = tuple(ops[0])
    return reduce(lambda a, b: Operator(np.kron(a.matrix, b.matrix), a.dims + b.dims), ops)


def two_level_sigma():
    """Lowering operator |g><e| with |g> = index 0."""
    return Operator([[0, 1], [0, 0]])


def projectors():
    """(P_g, P_e) = (sigma sigma^dagger, sigma^dagger sigma)."""
    s = two_level_sigma()
    return s @ s.dag(), s.dag() @ s


def basis(dim, n):
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return v
