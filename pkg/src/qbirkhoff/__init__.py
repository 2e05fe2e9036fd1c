"""Fuchsian q-difference systems: local solutions, Birkhoff connection matrices,
connection-preserving deformations and the confluence ``q -> 1``."""

from __future__ import annotations

from .birkhoff import connection_matrix, ellipticity_residual, pole_scan
from .errors import HypothesisViolation, NumericalFailure, QBirkhoffError
from .linalg import RationalFunction, RationalMatrix
from .qsystem import analyze_sigma_p, analyze_system, local_series
from .theta import QContext, theta_eval

__version__ = "0.1.0"

__all__ = [
    "HypothesisViolation",
    "NumericalFailure",
    "QBirkhoffError",
    "QContext",
    "RationalFunction",
    "RationalMatrix",
    "analyze_sigma_p",
    "analyze_system",
    "connection_matrix",
    "ellipticity_residual",
    "local_series",
    "pole_scan",
    "theta_eval",
]
