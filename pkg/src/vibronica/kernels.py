"""Kernel backend selection.

The compiled extension is used when it imports; setting the environment
variable VIBRONICA_PURE_PYTHON to a non-empty value forces the numpy
fallback.
"""
import os

from vibronica import _pykernels

if os.environ.get("VIBRONICA_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from vibronica import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "python" if _impl is _pykernels else "cython"

scaled_hermite = _impl.scaled_hermite
lorentzian_sum = _impl.lorentzian_sum
weighted_fourier = _impl.weighted_fourier
