import math

import pytest

from vibronica import CavityParams, MoleculeParams

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def report():
    def _report(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return _report


@pytest.fixture
def driven():
    """nu_e = 2 nu_g, lambda1 = 1, Gamma = 0.1, gamma = 0.01, eta_l = 2 gamma."""
    return MoleculeParams(nu_e=2.0, lambda1=1.0, gamma=0.01, Gamma=0.1, eta_l=0.02)


@pytest.fixture
def strong_cavity():
    return CavityParams(omega_c=0.0, g=3.0, kappa1=0.5, kappa2=0.5, eta_c=0.001)


def cavity_molecule(lambda1=1.0, nu_e=20.0):
    return MoleculeParams(nu_g=10.0, nu_e=nu_e, lambda1=lambda1, gamma=0.01, Gamma=20.0)


SQRT2 = math.sqrt(2)
