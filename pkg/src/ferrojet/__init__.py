"""Numerical laboratory for axisymmetric solitary waves on a ferrofluid jet.

Computes and cross-validates the dispersion relation built from modified
Bessel functions, the weakly nonlinear KdV/NLS envelope constants, the
surface (Dirichlet-Neumann type) operator both as a multiplier expansion
and through its Green's-kernel boundary-value problem, and Newton
continuations of the full-dispersion reduced equations and of the full
truncated travelling-wave equation.
"""

from .dispersion import DispersionProfile, Regime, make_profile
from .errors import (
    ConvergenceError,
    DomainError,
    ExistenceError,
    FerrojetError,
    GeometryError,
    GridError,
    ParameterError,
    RegimeError,
)
from .spectral import CutoffSpec, SpectralField, SpectralGrid
from .wnl import MagnetizationLaw, WnlCoeffs, wnl_coeffs, zeta_kdv, zeta_nls

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "DispersionProfile",
    "Regime",
    "make_profile",
    "SpectralGrid",
    "SpectralField",
    "CutoffSpec",
    "MagnetizationLaw",
    "WnlCoeffs",
    "wnl_coeffs",
    "zeta_kdv",
    "zeta_nls",
    "FerrojetError",
    "DomainError",
    "ParameterError",
    "RegimeError",
    "ExistenceError",
    "GeometryError",
    "GridError",
    "ConvergenceError",
]
