"""Local bifurcation analysis of a two-parameter planar Kolmogorov system."""

from __future__ import annotations

from .classify import Kind, classify_all, classify_equilibrium
from .curves import CaseId, CurveKind, dispatch_case, quad_coeffs
from .diagram import build_report, verify_tables
from .equilibria import EquilibriumId, all_equilibria
from .model import Coefficients, ParamPoint, RawCoefficients, State, canonicalize, vector_field

__version__ = "0.1.0"

__all__ = [
    "CaseId",
    "Coefficients",
    "CurveKind",
    "EquilibriumId",
    "Kind",
    "ParamPoint",
    "RawCoefficients",
    "State",
    "all_equilibria",
    "build_report",
    "canonicalize",
    "classify_all",
    "classify_equilibrium",
    "dispatch_case",
    "quad_coeffs",
    "vector_field",
    "verify_tables",
]
