"""Step engine shared by the integrator facade.

Provides :class:`BaseIntegrator`, which binds a method and solver settings,
runs single steps with error classification, keeps the frozen Jacobian
across steps when asked to, and builds :class:`IntegrationRun` records.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from lineint._logging import logger
from lineint.errors import ConvergenceError, LineIntegralError, NumericalError
from lineint.methods import step as method_step
from lineint.solvers import evaluate_jacobian
from lineint.systems import InvariantSet, ProblemDefinition
from lineint.types.methods import Method, StepResult
from lineint.types.runs import IntegrationRun
from lineint.types.solvers import SolverSettings


class _RunRecorder:
    """Accumulates samples of a run; invariants are monitored only when given."""

    def __init__(self, invariants: InvariantSet | None, y0: np.ndarray) -> None:
        self.invariants = invariants
        self.L0 = invariants.values(y0) if invariants is not None else np.zeros(0)
        self.times: list[float] = []
        self.states: list[np.ndarray] = []
        self.errors: list[np.ndarray] = []
        self.step_sizes: list[float] = []
        self.stats = {
            "steps": 0,
            "iterations": 0,
            "max_iterations": 0,
            "jacobian_evaluations": 0,
        }
        self.sample(0.0, y0)

    def sample(self, t: float, y: np.ndarray) -> None:
        self.times.append(t)
        self.states.append(np.array(y, dtype=float))
        if self.invariants is None:
            self.errors.append(np.zeros(0))
        elif not self.errors:
            self.errors.append(np.zeros_like(self.L0))
        else:
            self.errors.append(self.invariants.values(y) - self.L0)

    def accept(self, h: float, iterations: int) -> None:
        self.step_sizes.append(h)
        self.stats["steps"] += 1
        self.stats["iterations"] += iterations
        self.stats["max_iterations"] = max(self.stats["max_iterations"], iterations)

    def build(self, *, rejections: int = 0, error: LineIntegralError | None = None) -> IntegrationRun:
        nu = self.L0.shape[0]
        return IntegrationRun(
            times=np.array(self.times),
            states=np.array(self.states),
            invariant_errors=np.array(self.errors).reshape(len(self.errors), nu),
            step_sizes=np.array(self.step_sizes),
            rejections=rejections,
            solver_stats=dict(self.stats),
            failed=error is not None,
            failure=None if error is None else error.message,
            error=error,
        )


class BaseIntegrator:
    """Binds a method to solver settings and advances single steps.

    Args:
        method: An :class:`HBVMConfig`, :class:`LIMConfig` or
            :class:`ButcherTableau`.
        solver: Nonlinear solver settings (defaults to simplified Newton,
            ``tol = 1e-13``).
    """

    def __init__(self, method: Method, *, solver: SolverSettings | None = None) -> None:
        self.method = method
        self.solver = solver or SolverSettings()
        self._jacobian: np.ndarray | None = None
        self._jacobian_problem: ProblemDefinition | None = None
        self._refresh_jacobian = True
        self._jacobian_evaluations = 0

    @property
    def order(self) -> int:
        return self.method.order

    def with_solver(self, **changes: object) -> SolverSettings:
        """Copy of the solver settings with *changes* applied."""
        return dataclasses.replace(self.solver, **changes)  # type: ignore[arg-type]

    # ------------------------------------------------------------------
    # Jacobian reuse
    # ------------------------------------------------------------------

    def _reset_cache(self) -> None:
        self._jacobian = None
        self._jacobian_problem = None
        self._refresh_jacobian = True
        self._jacobian_evaluations = 0

    def _jacobian_for(self, problem: ProblemDefinition, y: np.ndarray) -> np.ndarray | None:
        if not (self.solver.reuse_jacobian and self.solver.needs_jacobian):
            return None
        # a cached J0 belongs to the problem it was evaluated for
        if self._jacobian is None or self._refresh_jacobian or problem is not self._jacobian_problem:
            self._jacobian = evaluate_jacobian(problem, y, self.solver.jacobian_policy)
            self._jacobian_problem = problem
            self._refresh_jacobian = False
            self._jacobian_evaluations += 1
        return self._jacobian

    # ------------------------------------------------------------------
    # Steps
    # ------------------------------------------------------------------

    def _step(
        self,
        problem: ProblemDefinition,
        y: np.ndarray,
        h: float,
        *,
        invariants: InvariantSet | None = None,
        step_index: int = 0,
        settings: SolverSettings | None = None,
    ) -> StepResult:
        """Advance one step; a non-converged solve becomes :class:`ConvergenceError`.

        Raises:
            NumericalError: Annotated with *h* and *step_index*.
            LineIntegralError: Domain or degeneracy errors from the problem.
        """
        settings = settings or self.solver
        try:
            result = method_step(
                self.method,
                problem,
                y,
                h,
                settings,
                invariants=invariants,
                jacobian=self._jacobian_for(problem, y),
            )
        except NumericalError as exc:
            self._refresh_jacobian = True
            raise exc.located(h=h, step_index=step_index) from exc
        except LineIntegralError as exc:
            self._refresh_jacobian = True
            raise type(exc)(f"step {step_index} (h={h:.6g}): {exc.message}") from exc
        if not result.converged:
            self._refresh_jacobian = True
            raise ConvergenceError(
                f"solver did not converge in {result.iterations} iterations "
                f"(residual {result.solver_residual:.3e})"
            ).located(h=h, step_index=step_index)
        if result.iterations > settings.reuse_threshold:
            self._refresh_jacobian = True
        logger.debug(
            "step %d: h=%.6g iterations=%d residual=%.3e",
            step_index,
            h,
            result.iterations,
            result.solver_residual,
        )
        return result

    def step(
        self,
        problem: ProblemDefinition,
        y0: np.ndarray,
        h: float,
        *,
        invariants: InvariantSet | None = None,
    ) -> StepResult:
        """One step of the bound method (no error raised for non-convergence)."""
        return method_step(self.method, problem, y0, h, self.solver, invariants=invariants)

    def _recorder(self, invariants: InvariantSet | None, y0: np.ndarray) -> _RunRecorder:
        self._reset_cache()
        return _RunRecorder(invariants, y0)

    def _finish_run(
        self,
        recorder: _RunRecorder,
        *,
        rejections: int = 0,
        error: LineIntegralError | None = None,
    ) -> IntegrationRun:
        recorder.stats["jacobian_evaluations"] = self._jacobian_evaluations
        if error is not None:
            logger.error("run aborted: %s", error.message)
        return recorder.build(rejections=rejections, error=error)
