"""lineint exception hierarchy.

All library exceptions inherit from :class:`LineIntegralError`, so callers can
use ``except LineIntegralError`` as a catch-all.

Hierarchy::

    LineIntegralError (base)
    ├── ConfigurationError (invalid method / solver / run settings)
    ├── ParameterError (problem parameters violate a constraint)
    ├── DomainError (state outside the domain of the vector field)
    ├── DimensionError (mismatched array shapes)
    ├── ConstraintDegeneracyError (invariant gradients lose rank)
    └── NumericalError (failure while computing a step)
        ├── SingularIterationMatrixError (LU factorisation failed)
        ├── DivergenceError (NaN / overflow during iteration)
        ├── ConvergenceError (iteration cap reached)
        └── StepSizeUnderflowError (adaptive stepsize below h_min)
"""

from __future__ import annotations


class LineIntegralError(Exception):
    """Base exception for all lineint errors."""

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message

    @property
    def retryable(self) -> bool:
        """Whether the failing step may succeed when retried with a smaller stepsize."""
        return False


class ConfigurationError(LineIntegralError):
    """Invalid method, solver or run configuration (e.g. ``k < s``)."""


class ParameterError(LineIntegralError):
    """Problem parameters violate a structural constraint (e.g. ``abc != -1``)."""


class DomainError(LineIntegralError):
    """The vector field was evaluated outside its domain.

    Raised, for example, for Kepler states with ``|q| < 1e-12`` or
    Lotka-Volterra states with a nonpositive component.
    """

    @property
    def retryable(self) -> bool:
        # Newton iterates can wander off the domain when h is too large.
        return True


class DimensionError(LineIntegralError):
    """Array shapes of problem, invariants and state do not agree."""


class ConstraintDegeneracyError(LineIntegralError):
    """``phi_0^T phi_0`` is numerically singular.

    The enforced invariants are not functionally independent at the current
    point, so the multiplier ``alpha`` is not defined.
    """


class NumericalError(LineIntegralError):
    """Failure while computing a step.

    The :attr:`h` and :attr:`step_index` attributes locate the failing step
    when the error was raised by a driver; both are *None* otherwise.
    """

    def __init__(
        self,
        message: str,
        *,
        h: float | None = None,
        step_index: int | None = None,
    ) -> None:
        super().__init__(message)
        self.h = h
        self.step_index = step_index

    def located(self, *, h: float, step_index: int) -> NumericalError:
        """Return a copy of this error annotated with the failing step."""
        error = type(self)(
            f"step {step_index} (h={h:.6g}): {self.message}",
            h=h,
            step_index=step_index,
        )
        error.__cause__ = self
        return error


class SingularIterationMatrixError(NumericalError):
    """The iteration matrix could not be factored; reduce the stepsize."""

    @property
    def retryable(self) -> bool:
        return True


class DivergenceError(NumericalError):
    """NaN or overflow appeared in the iterates."""

    @property
    def retryable(self) -> bool:
        return True


class ConvergenceError(NumericalError):
    """The nonlinear iteration reached its cap without meeting the tolerance."""

    @property
    def retryable(self) -> bool:
        return True


class StepSizeUnderflowError(NumericalError):
    """The adaptive controller requested a stepsize below ``h_min``."""
