import numpy as np
import pytest

from vibronica import MoleculeParams, analytic, fock, lindblad, model
from vibronica.errors import DegenerateSteadyStateError, NumericalError

pytestmark = pytest.mark.filterwarnings("ignore:frequency grid is coarser")


def two_level(delta=0.0, eta=0.004, gamma=0.01, n_fock=3):
    return MoleculeParams(gamma=gamma, Gamma=0.1, eta_l=eta, omega_l=delta), n_fock


def test_liouvillian_preserves_trace(driven):
    L = lindblad.molecule_liouvillian(driven, 8)
    assert L.trace_defect() < 1e-13


def test_two_level_steady_state_textbook():
    for delta in (0.0, 0.02):
        p, nf = two_level(delta)
        rho = lindblad.steady_state(lindblad.molecule_liouvillian(p, nf))
        pe = np.trace(rho.matrix[nf:, nf:]).real
        ref = p.eta_l ** 2 / (delta ** 2 + p.gamma ** 2 + 2 * p.eta_l ** 2)
        assert pe == pytest.approx(ref, rel=1e-10)


def test_evolve_reaches_steady_state():
    p = MoleculeParams(nu_e=2.0, lambda1=1.0, gamma=0.05, Gamma=0.2, eta_l=0.05)
    L = lindblad.molecule_liouvillian(p, 8)
    g0 = np.zeros(16)
    g0[0] = 1
    traj = lindblad.evolve(L, lindblad.DensityMatrix.pure(g0), 600.0, tol=1e-10, n_snapshots=5)
    for s in traj.states:
        s.check()
    ss = lindblad.steady_state(L)
    assert np.abs(traj.states[-1].matrix - ss.matrix).max() < 1e-7


def test_degenerate_steady_state_detected():
    p = MoleculeParams(gamma=0.0, Gamma=0.0)
    with pytest.raises(DegenerateSteadyStateError):
        lindblad.steady_state(lindblad.molecule_liouvillian(p, 3))


def test_density_matrix_checks():
    with pytest.raises(NumericalError):
        lindblad.DensityMatrix(fock.Operator(np.diag([0.7, 0.7]))).check()
    with pytest.raises(NumericalError):
        lindblad.DensityMatrix(fock.Operator(np.diag([1.2, -0.2]))).check()
    with pytest.raises(NumericalError):
        lindblad.DensityMatrix(fock.Operator([[0.5, 0.1], [0.0, 0.5]])).check()


def test_free_decay_correlation():
    # <sigma(tau) sigma^dag(0)> in |g> decays as exp(-(i omega_0 + gamma) tau)
    p = MoleculeParams(omega_00=0.7, gamma=0.02, Gamma=0.1)
    nf = 3
    L = lindblad.molecule_liouvillian(p, nf, frame="lab")
    s = lindblad.sigma_op(nf).matrix
    g0 = np.zeros(2 * nf)
    g0[0] = 1
    taus = np.linspace(0, 30, 61)
    c = lindblad.two_time_correlation(L, s, s.conj().T, np.outer(g0, g0), taus)
    assert np.allclose(c.values, np.exp(-(1j * p.omega_0 + p.gamma) * taus), atol=1e-12)


def test_emission_spectrum_two_level_lorentzian():
    p = MoleculeParams(gamma=0.01, Gamma=0.1)
    w = np.linspace(-0.5, 0.5, 201)
    s = lindblad.numeric_emission_spectrum(p, w, n_fock=3)
    assert np.allclose(s.values, p.gamma / (p.gamma ** 2 + w ** 2), rtol=1e-10)


def test_emission_spectrum_matches_analytic(driven):
    w = np.linspace(-3.5, 1, 901)
    num = lindblad.numeric_emission_spectrum(driven, w, n_fock=12).values
    ana = analytic.lineshape(driven, w, "emission")
    assert np.abs(num - ana).max() < 1e-3 * ana.max()


def test_quadrature_agrees_with_resolvent(driven):
    w = np.linspace(-2.5, 1, 36)
    a = lindblad.numeric_emission_spectrum(driven, w, n_fock=8, method="quadrature").values
    b = lindblad.numeric_emission_spectrum(driven, w, n_fock=8).values
    assert np.abs(a - b).max() < 1e-8 * b.max()


def test_frequency_sweep_matches_direct_solve(driven):
    nf = 5
    sw = lindblad.molecule_sweep(driven, nf)
    for w in (-0.3, 0.0, 0.41):
        rho = sw.solve(w)
        L = lindblad.molecule_liouvillian(driven.replace(omega_l=driven.omega_00 + w), nf)
        ref = lindblad.steady_state(L).matrix
        assert np.abs(rho - ref).max() < 1e-11


def test_population_scan_matches_analytic_shape(driven):
    w = np.linspace(-0.2, 0.2, 41)
    num = lindblad.population_scan(driven, w, n_fock=10)
    ana = analytic.steady_population_scan(driven, w)
    assert np.abs(num - ana).max() < 0.02 * ana.max()


def test_absorption_population_method_guards_drive(driven):
    with pytest.raises(ValueError):
        lindblad.numeric_absorption_spectrum(driven, np.linspace(-1, 1, 5), 6, "population")


def test_cross_manifold_correlations_small(driven):
    taus = np.linspace(0, 50, 101)
    c, rho = lindblad.vibrational_correlations(driven, taus, n_fock=10)
    same = min(np.abs(c["gg"].values).max(), np.abs(c["ee"].values).max())
    cross = max(np.abs(c["ge"].values).max(), np.abs(c["eg"].values).max())
    assert cross < 0.1 * same


def test_dynamics_truncation_drift(driven):
    # Record, rather than bound at 1e-8, the N_f -> N_f + 8 drift of the emission spectrum.
    w = np.linspace(-3, 0.5, 351)
    a = lindblad.numeric_emission_spectrum(driven, w, n_fock=12).values
    b = lindblad.numeric_emission_spectrum(driven, w, n_fock=20).values
    drift = np.abs(a - b).max() / b.max()
    assert drift < 1e-3
