"""Line-integral methods: Gauss, HBVM(k, s) and LIM(r, k, s) integrators."""

from ._logging import set_debug
from .errors import (
    ConfigurationError,
    ConstraintDegeneracyError,
    ConvergenceError,
    DimensionError,
    DivergenceError,
    DomainError,
    LineIntegralError,
    NumericalError,
    ParameterError,
    SingularIterationMatrixError,
    StepSizeUnderflowError,
)
from .integrator import Integrator
from .methods import gauss, hbvm, hbvm_tableau, lim, step, trapezoidal_tableau
from .systems import InvariantSet, ProblemDefinition, generic, kepler, lotka_volterra, poly_hamiltonian
from .types import AdaptiveSettings, IntegrationRun, SolverSettings

__version__ = "0.1.0"

__all__ = [
    "AdaptiveSettings",
    "ConfigurationError",
    "ConstraintDegeneracyError",
    "ConvergenceError",
    "DimensionError",
    "DivergenceError",
    "DomainError",
    "IntegrationRun",
    "Integrator",
    "InvariantSet",
    "LineIntegralError",
    "NumericalError",
    "ParameterError",
    "ProblemDefinition",
    "SingularIterationMatrixError",
    "SolverSettings",
    "StepSizeUnderflowError",
    "__version__",
    "gauss",
    "generic",
    "hbvm",
    "hbvm_tableau",
    "kepler",
    "lim",
    "lotka_volterra",
    "poly_hamiltonian",
    "set_debug",
    "step",
    "trapezoidal_tableau",
]
