import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vibronica import MoleculeParams, franck_condon as fc

# |<m_g|0_e>|^2 and |<m_e|0_g>|^2 from position-space overlap integrals of
# harmonic-oscillator eigenfunctions (30-digit quadrature), m = 0..6.
OVERLAP_ORACLE = {
    (1.0, 2.0): (
        [0.86742619276960277, 0.096380688085511419, 0.021417930685669204,
         0.012692107072989158, 0.00055087270282070998, 0.0013754679308652216,
         4.3888458957238458e-6],
        [0.86742619276960277, 0.048190344042755709, 0.065592412724861938,
         0.0089489270573224337, 0.0072388116105033921, 0.0013817761884134949,
         0.00086826212651074294]),
    (0.5, math.sqrt(2)): (
        [0.91561169675552771, 0.078547065714182688, 0.0033691364768330688,
         0.0024085518018864196, 2.0662107892369887e-6, 5.9592412538891089e-5,
         4.870953966719709e-7],
        [0.91561169675552771, 0.055541162808803947, 0.024690471143795275,
         0.00306458326790407, 0.00090992211077242757, 0.00013966139316715281,
         3.4961372952312492e-5]),
}


@pytest.mark.parametrize("key", list(OVERLAP_ORACLE))
def test_closed_forms_match_overlap_integrals(key):
    lam1, nu_e = key
    p = MoleculeParams(nu_e=nu_e, lambda1=lam1)
    em, ab = OVERLAP_ORACLE[key]
    assert np.allclose(fc.fc_weights(p, "emission", 6), em, rtol=1e-12, atol=1e-15)
    assert np.allclose(fc.fc_weights(p, "absorption", 6), ab, rtol=1e-12, atol=1e-15)


def test_poisson_limit():
    p = MoleculeParams(lambda1=1.0)
    m = np.arange(16)
    ref = np.exp(-1.0) / np.array([math.factorial(int(k)) for k in m])
    assert np.abs(fc.fc_weights(p, "em", 15) - ref).max() < 1e-14
    assert np.abs(fc.fc_weights(p, "ab", 15) - ref).max() < 1e-14


def test_asymmetry_with_quadratic_coupling():
    p = MoleculeParams(nu_e=2.0, lambda1=1.0)
    d = np.abs(fc.fc_weights(p, "em", 10) - fc.fc_weights(p, "ab", 10)).max()
    assert d > 1e-3


def test_no_coupling_is_a_single_line():
    p = MoleculeParams()
    s = fc.fc_series(p, "emission")
    assert s.weights[0] == pytest.approx(1.0, abs=1e-15)
    assert s.total == pytest.approx(1.0, abs=1e-15)


def test_series_tail_and_kind_validation():
    p = MoleculeParams(nu_e=2.0, lambda1=1.0)
    s = fc.fc_series(p, "absorption", tail_tol=1e-12)
    assert 1 - 1e-12 <= s.total <= 1 + 1e-15
    with pytest.raises(ValueError):
        fc.fc_weights(p, "raman", 3)


def test_correlator_at_zero_is_normalized():
    p = MoleculeParams(nu_e=2.0, lambda1=1.0)
    assert abs(fc.correlator_F("emission", 1.0, 0.0, p) - 1.0) < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 1.5), st.floats(0.0, 1.0))
def test_sum_rule_property(lam1, lam2):
    p = MoleculeParams.from_couplings(lambda1=lam1, lambda2=lam2)
    for kind in ("emission", "absorption"):
        s = fc.fc_series(p, kind)
        assert np.all(s.weights >= 0)
        assert 1 - 1e-8 <= s.total <= 1 + 1e-12
