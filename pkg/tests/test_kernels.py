import os
import subprocess
import sys

import numpy as np
import pytest

from vibronica import _pykernels, kernels

try:
    from vibronica import _ckernels
except ImportError:
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled extension not built")


def test_backend_flag():
    assert kernels.BACKEND in ("cython", "python")


def test_env_var_forces_python():
    env = dict(os.environ, VIBRONICA_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import vibronica; print(vibronica.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_scaled_hermite_is_hermite():
    # beta = 1/4 maps h_m onto H_m(c) / (2^m sqrt(m!))
    c = 0.6
    h = _pykernels.scaled_hermite(c, 0.25, 8)
    import math
    ref = [np.polynomial.hermite.hermval(c, np.eye(9)[m]) / (2 ** m * math.sqrt(math.factorial(m)))
           for m in range(9)]
    assert np.allclose(h, ref, rtol=1e-13)


@needs_ext
def test_backends_agree():
    rng = np.random.default_rng(3)
    h1 = _pykernels.scaled_hermite(0.3 - 0.4j, 0.2, 150)
    h2 = _ckernels.scaled_hermite(0.3 - 0.4j, 0.2, 150)
    assert np.allclose(h1, h2, rtol=1e-13, atol=1e-300)
    x = np.linspace(-3, 3, 301)
    w, c, k = rng.random(12), rng.normal(size=12), 0.01 + rng.random(12)
    assert np.allclose(_pykernels.lorentzian_sum(x, w, c, k),
                       _ckernels.lorentzian_sum(x, w, c, k), rtol=1e-13)
    v = rng.normal(size=3000) + 1j * rng.normal(size=3000)
    om = np.linspace(-2, 2, 101)
    a = _pykernels.weighted_fourier(v, 0.03, om)
    b = _ckernels.weighted_fourier(v, 0.03, om)
    assert np.abs(a - b).max() < 1e-10 * np.abs(v).sum()


def test_weighted_fourier_definition():
    v = np.array([1.0, 2.0, 3.0 + 1j])
    om = np.array([0.0, 0.7])
    ref = [np.sum(v * np.exp(1j * w * 0.1 * np.arange(3))) for w in om]
    assert np.allclose(kernels.weighted_fourier(v, 0.1, om), ref, rtol=1e-14)
