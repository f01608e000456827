"""Vibronic spectroscopy of molecules with linear and quadratic electron-vibron coupling.

Two independent routes to every observable: closed-form Franck-Condon
analytics and brute-force Lindblad simulation in a truncated Fock space.
"""
from vibronica.kernels import BACKEND
from vibronica.model import CavityParams, FirstPrinciplesParams, MoleculeParams

__version__ = "0.1.0"

__all__ = ["BACKEND", "CavityParams", "FirstPrinciplesParams", "MoleculeParams", "__version__"]
