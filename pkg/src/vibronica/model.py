"""Parameters and Hamiltonians of the quadratically coupled Holstein model.

All frequencies are in units of the ground-state vibrational frequency
nu_g unless a config says otherwise. H (lab frame, electronic factor first):

    nu_g b^dag b + [omega_0 + lambda1 nu_g x + lambda2 nu_g x^2] P_e,   x = b + b^dag

with lambda2 = (nu_e^2 - nu_g^2) / (4 nu_g^2) fixed by the excited-state
curvature and omega_0 rebuilt from the zero-phonon line omega_00.
"""
import math
from dataclasses import dataclass, fields, replace

import numpy as np

from vibronica.fock import (FockSpace, Operator, annihilator, displacement, identity,
                            position, projectors, squeezing, tensor, two_level_sigma)


@dataclass(frozen=True)
class MoleculeParams:
    nu_g: float = 1.0
    nu_e: float = 1.0
    lambda1: float = 0.0
    omega_00: float = 0.0
    gamma: float = 0.01
    Gamma: float = 0.1
    eta_l: float = 0.0
    omega_l: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not np.isfinite(v):
                raise ValueError(f"MoleculeParams.{f.name} must be finite")
        if self.nu_g <= 0 or self.nu_e <= 0:
            raise ValueError("nu_g and nu_e must be positive")
        if self.gamma < 0 or self.Gamma < 0:
            raise ValueError("decay rates must be non-negative")

    @classmethod
    def from_couplings(cls, lambda1=0.0, lambda2=0.0, nu_g=1.0, **kw):
        """Build from (lambda1, lambda2); nu_e follows from 1 + 4 lambda2 = (nu_e/nu_g)^2."""
        if lambda2 <= -0.25:
            raise ValueError("lambda2 must exceed -1/4 (bound excited potential)")
        return cls(nu_g=nu_g, nu_e=nu_g * math.sqrt(1 + 4 * lambda2), lambda1=lambda1, **kw)

    @classmethod
    def from_mapping(cls, d):
        """Build from a dict that may carry lambda2, nu_e or both (checked for consistency)."""
        d = dict(d)
        lam2 = d.pop("lambda2", None)
        nu_g = d.get("nu_g", 1.0)
        if lam2 is not None:
            if lam2 <= -0.25:
                raise ValueError("lambda2 must exceed -1/4")
            nu_e = nu_g * math.sqrt(1 + 4 * lam2)
            if "nu_e" in d:
                implied = (d["nu_e"] ** 2 - nu_g ** 2) / (4 * nu_g ** 2)
                if abs(implied - lam2) > 1e-12 * max(1.0, abs(lam2)):
                    raise ValueError(f"lambda2={lam2} is inconsistent with nu_e/nu_g "
                                     f"(which implies lambda2={implied})")
            d["nu_e"] = nu_e
        return cls(**d)

    @property
    def lambda2(self):
        return (self.nu_e ** 2 - self.nu_g ** 2) / (4 * self.nu_g ** 2)

    @property
    def r_d(self):
        return -self.lambda1 * self.nu_g ** 2 / self.nu_e ** 2

    @property
    def r_s(self):
        return 0.5 * math.log(self.nu_e / self.nu_g)

    @property
    def omega_0(self):
        return (self.omega_00 - (self.nu_e - self.nu_g) / 2
                + self.lambda1 ** 2 * self.nu_g ** 3 / self.nu_e ** 2)

    @property
    def delta_l(self):
        """Laser detuning omega_00 - omega_l."""
        return self.omega_00 - self.omega_l

    def replace(self, **kw):
        return replace(self, **kw)


@dataclass(frozen=True)
class FirstPrinciplesParams:
    mu: float
    R_eg: float
    omega_e: float
    omega_g: float
    nu_e: float
    nu_g: float

    def __post_init__(self):
        if self.mu <= 0 or self.nu_e <= 0 or self.nu_g <= 0:
            raise ValueError("mu, nu_e and nu_g must be positive")

    @property
    def R_zpm(self):
        return 1.0 / math.sqrt(2 * self.mu * self.nu_g)

    @property
    def omega_0(self):
        lam1 = -self.mu * self.nu_e ** 2 * self.R_eg * self.R_zpm / self.nu_g
        return self.omega_e - self.omega_g + lam1 ** 2 * self.nu_g ** 3 / self.nu_e ** 2


@dataclass(frozen=True)
class CavityParams:
    omega_c: float = 0.0
    g: float = 3.0
    kappa1: float = 0.5
    kappa2: float = 0.5
    eta_c: float = 0.001
    n_molecules: int = 1

    def __post_init__(self):
        if self.kappa1 < 0 or self.kappa2 < 0 or self.kappa <= 0:
            raise ValueError("kappa1, kappa2 must be >= 0 with kappa1 + kappa2 > 0")
        if int(self.n_molecules) != self.n_molecules or self.n_molecules < 1:
            raise ValueError("n_molecules must be a positive integer")

    @property
    def kappa(self):
        return self.kappa1 + self.kappa2

    def replace(self, **kw):
        return replace(self, **kw)


def from_first_principles(fp, **rates):
    """Molecule parameters from potential-surface data.

    Uses x_hat = R_zpm (b + b^dag) and the sign lambda1 = -mu nu_e^2 R_eg R_zpm / nu_g.
    ``rates`` passes gamma, Gamma, eta_l, omega_l through.
    """
    lam1 = -fp.mu * fp.nu_e ** 2 * fp.R_eg * fp.R_zpm / fp.nu_g
    om00 = fp.omega_e - fp.omega_g + (fp.nu_e - fp.nu_g) / 2
    return MoleculeParams(nu_g=fp.nu_g, nu_e=fp.nu_e, lambda1=lam1, omega_00=om00, **rates)


def first_principles_hamiltonian(fp, space):
    """Two-surface Hamiltonian written directly in R and P (reference construction).

    Energies are shifted by omega_g + nu_g/2 so the ground vibrational vacuum
    sits at zero, as in holstein_hamiltonian.
    """
    b = annihilator(space).matrix
    bd = b.conj().T
    R = fp.R_zpm * (b + bd)
    P = 1j * (bd - b) / (2 * fp.R_zpm)
    kin = P @ P / (2 * fp.mu)
    one = np.eye(space.dim)
    Vg = fp.omega_g * one + kin + 0.5 * fp.mu * fp.nu_g ** 2 * R @ R
    dR = R - fp.R_eg * one
    Ve = fp.omega_e * one + kin + 0.5 * fp.mu * fp.nu_e ** 2 * dR @ dR
    Pg, Pe = projectors()
    H = np.kron(Pg.matrix, Vg) + np.kron(Pe.matrix, Ve)
    H = H - (fp.omega_g + fp.nu_g / 2) * np.eye(H.shape[0])
    return Operator(0.5 * (H + H.conj().T), (2, space.dim))


def _excited_block(p, space, omega_0):
    x = position(space).matrix
    return omega_0 * np.eye(space.dim) + p.lambda1 * p.nu_g * x + p.lambda2 * p.nu_g * (x @ x)


def _molecule(p, space, omega_0, eta):
    n = np.diag(np.arange(space.dim, dtype=float))
    Pg, Pe = projectors()
    H = np.kron(np.eye(2), p.nu_g * n) + np.kron(Pe.matrix, _excited_block(p, space, omega_0))
    if eta:
        s = two_level_sigma().matrix
        H = H + np.kron(1j * eta * (s.conj().T - s), np.eye(space.dim))
    return 0.5 * (H + H.conj().T)


def holstein_hamiltonian(p, space):
    """Lab-frame molecular Hamiltonian on electron (x) vibration, no drive."""
    return Operator(_molecule(p, space, p.omega_0, 0.0), (2, space.dim))


def drive_hamiltonian(p, space):
    """The bare drive term i eta (sigma^dag - sigma) on electron (x) vibration."""
    s = two_level_sigma().matrix
    return Operator(np.kron(1j * p.eta_l * (s.conj().T - s), np.eye(space.dim)), (2, space.dim))


def rotating_hamiltonian(p, space):
    """H in the frame rotating at omega_l: electronic energy shifted by -omega_l, plus drive."""
    return Operator(_molecule(p, space, p.omega_0 - p.omega_l, p.eta_l), (2, space.dim))


def polaron_unitary(p, space):
    """U = P_g (x) 1 + P_e (x) D(r_d) S(r_s); U^dag H U is diagonal."""
    Pg, Pe = projectors()
    ds = displacement(space, p.r_d).matrix @ squeezing(space, p.r_s).matrix
    return Operator(np.kron(Pg.matrix, np.eye(space.dim)) + np.kron(Pe.matrix, ds), (2, space.dim))


def excited_collapse_block(p, space):
    """D S b S^dag D^dag = cosh(r_s) b + sinh(r_s) b^dag - r_d e^{r_s}, written out exactly."""
    b = annihilator(space).matrix
    return (math.cosh(p.r_s) * b + math.sinh(p.r_s) * b.conj().T
            - p.r_d * math.exp(p.r_s) * np.eye(space.dim))


def vibrational_collapse(p, space):
    """U b U^dag: bare b on the ground manifold, dressed b on the excited one."""
    Pg, Pe = projectors()
    b = annihilator(space).matrix
    c = np.kron(Pg.matrix, b) + np.kron(Pe.matrix, excited_collapse_block(p, space))
    return Operator(c, (2, space.dim))


def molecule_collapses(p, space):
    """[(operator, rate)] for electronic decay at gamma and vibrational relaxation at Gamma."""
    s = tensor(two_level_sigma(), identity(space.dim))
    return [(s, p.gamma), (vibrational_collapse(p, space), p.Gamma)]


def excitation_number(dims):
    """Diagonal of a^dag a + sigma^dag sigma for (photon,) electron, vibration ordering."""
    if len(dims) == 2:
        return np.repeat([0, 1], dims[1])
    nph, _, nv = dims
    return (np.arange(nph)[:, None, None] + np.array([0, 1])[None, :, None]
            + np.zeros(nv, dtype=int)[None, None, :]).ravel()


def cavity_hamiltonian(p, c, vib_space, photon_space):
    """Rotating-frame (at omega_l) Hamiltonian on photon (x) electron (x) vibration.

    (omega_c - omega_l) a^dag a + molecule(omega_00 - omega_l) + g (a sigma^dag + a^dag sigma)
    + i eta_c (a^dag - a). The molecule is driven only through the cavity.
    """
    nph = photon_space.dim
    mol = _molecule(p, vib_space, p.omega_0 - p.omega_l, 0.0)
    a = annihilator(photon_space).matrix
    s = np.kron(two_level_sigma().matrix, np.eye(vib_space.dim))
    dm = mol.shape[0]
    A = np.kron(a, np.eye(dm))
    S = np.kron(np.eye(nph), s)
    H = ((c.omega_c - p.omega_l) * A.conj().T @ A + np.kron(np.eye(nph), mol)
         + c.g * (A @ S.conj().T + A.conj().T @ S) + 1j * c.eta_c * (A.conj().T - A))
    return Operator(0.5 * (H + H.conj().T), (nph, 2, vib_space.dim))


def cavity_collapses(p, c, vib_space, photon_space):
    nph = photon_space.dim
    one_m = np.eye(2 * vib_space.dim)
    a = Operator(np.kron(annihilator(photon_space).matrix, one_m), (nph, 2, vib_space.dim))
    dims = (nph, 2, vib_space.dim)
    out = [(Operator(np.kron(np.eye(nph), op.matrix), dims), r)
           for op, r in molecule_collapses(p, vib_space)]
    out += [(a, c.kappa1), (a, c.kappa2)]
    return out


def photon_annihilator(vib_space, photon_space):
    nph = photon_space.dim
    return Operator(np.kron(annihilator(photon_space).matrix, np.eye(2 * vib_space.dim)),
                    (nph, 2, vib_space.dim))
