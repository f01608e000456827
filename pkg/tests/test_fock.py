import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vibronica import fock
from vibronica.errors import TruncationError


def test_ladder_algebra():
    sp = fock.FockSpace(8)
    b = fock.annihilator(sp)
    comm = (b @ b.dag() - b.dag() @ b).matrix
    assert np.allclose(np.diag(comm)[:-1], 1.0)
    assert np.allclose(np.diag(fock.number(sp).matrix), np.arange(8))


def test_operator_is_read_only_and_checks_dims():
    a = fock.Operator(np.eye(2))
    with pytest.raises(ValueError):
        a.matrix[0, 0] = 2
    with pytest.raises(ValueError):
        fock.Operator(np.eye(4), dims=(2, 3))
    with pytest.raises(ValueError):
        a @ fock.Operator(np.eye(2), dims=(2,)).__class__(np.eye(4), (2, 2))


def test_displacement_coherent_state():
    sp = fock.FockSpace(40)
    r = 0.8
    psi = fock.displacement(sp, r).matrix[:, 0]
    n = np.arange(40)
    ref = np.exp(-r * r / 2) * r ** n / np.sqrt([float(math.factorial(int(k))) for k in n])
    assert np.allclose(psi, ref, atol=1e-12)


def test_squeezed_vacuum_amplitudes():
    sp = fock.FockSpace(60)
    r = 0.4
    psi = fock.squeezing(sp, r).matrix[:, 0]
    # S(r) = exp(r (b^2 - b^dag^2) / 2): <2n|S|0> = (-tanh r)^n sqrt((2n)!)/(2^n n!) / sqrt(cosh r)
    for k in range(5):
        ref = ((-math.tanh(r)) ** k * math.sqrt(math.factorial(2 * k))
               / (2 ** k * math.factorial(k)) / math.sqrt(math.cosh(r)))
        assert abs(psi[2 * k] - ref) < 1e-12
        assert abs(psi[2 * k + 1]) < 1e-14


def test_truncation_error_for_large_displacement():
    with pytest.raises(TruncationError):
        fock.displacement(fock.FockSpace(6), 2.0)


def test_tensor_and_projectors():
    pg, pe = fock.projectors()
    assert np.allclose(pg.matrix, np.diag([1, 0]))
    assert np.allclose(pe.matrix, np.diag([0, 1]))
    t = fock.tensor(pg, fock.identity((3,)))
    assert t.dims == (2, 3)


@settings(max_examples=25, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(-0.5, 0.5))
def test_displacement_squeezing_identity(rd, rs):
    # D(r_d) S(r_s) = S(r_s) D(r_d e^{r_s}) on low-lying states
    sp = fock.FockSpace(64)
    lhs = fock.displacement(sp, rd).matrix @ fock.squeezing(sp, rs).matrix
    rhs = fock.squeezing(sp, rs).matrix @ fock.displacement(sp, rd * math.exp(rs)).matrix
    assert np.abs(lhs[:15, :3] - rhs[:15, :3]).max() < 1e-9
