from __future__ import annotations

from .quadrature import QuadratureRule, SpectralMatrices
from .methods import ButcherTableau, HBVMConfig, LIMConfig, Method, StepResult
from .runs import AdaptiveSettings, ConvergenceStudy, GrowthFit, IntegrationRun, StabilityScan
from .solvers import (
    SOLVER_KINDS,
    BlendedParams,
    JacobianPolicy,
    SolverDiagnostics,
    SolverKind,
    SolverSettings,
)

__all__ = [
    "SOLVER_KINDS",
    "AdaptiveSettings",
    "BlendedParams",
    "ButcherTableau",
    "ConvergenceStudy",
    "GrowthFit",
    "HBVMConfig",
    "IntegrationRun",
    "JacobianPolicy",
    "LIMConfig",
    "Method",
    "QuadratureRule",
    "SolverDiagnostics",
    "SolverKind",
    "SolverSettings",
    "SpectralMatrices",
    "StabilityScan",
    "StepResult",
]
