"""Convergence-order studies, reference solutions and per-period error series."""

from __future__ import annotations

import numpy as np

from lineint._fitting import loglog_order, polyfit_quality
from lineint._logging import logger
from lineint.errors import ConfigurationError
from lineint.methods import gauss
from lineint.runs._mixin_base import StepperMixin
from lineint.systems import InvariantSet, ProblemDefinition
from lineint.types.runs import ConvergenceStudy, GrowthFit, IntegrationRun
from lineint.types.solvers import SolverSettings

REFERENCE_STAGES = 8
REFERENCE_TOL = 1e-14
REFERENCE_REFINEMENT = 4
_TIME_RTOL = 1e-9
_GROWTH_FIT_RESOLUTION = 1e-3


def _steps_for(t_end: float, h: float) -> int:
    n = int(round(t_end / h))
    if n < 1 or abs(n * h - t_end) > _TIME_RTOL * max(1.0, t_end):
        raise ConfigurationError(f"stepsize {h} does not divide t_end={t_end}")
    return n


def _raise_on_failure(run: IntegrationRun) -> None:
    if run.failed and run.error is not None:
        raise run.error


def per_period_error(
    run: IntegrationRun,
    period: float,
    reference: np.ndarray | None = None,
) -> np.ndarray:
    """``max|y(nT) - reference|`` for ``n = 0, 1, ...`` over the run.

    *reference* defaults to the initial state, the exact value at every
    period of a periodic solution.  Entry ``n`` is *nan* when no sample falls
    on ``nT``; entry 0 is exactly zero when the reference is the initial state.

    Raises:
        ConfigurationError: If *period* is not positive or the run covers less
            than one period.
    """
    if not (np.isfinite(period) and period > 0):
        raise ConfigurationError(f"period must be positive and finite, got {period}")
    t_last = float(run.times[-1])
    if t_last < period * (1.0 - _TIME_RTOL):
        raise ConfigurationError(f"run ends at t={t_last:.6g}, before one period ({period:.6g})")
    ref = run.states[0] if reference is None else np.asarray(reference, dtype=float)
    count = int(np.floor(t_last / period * (1.0 + _TIME_RTOL))) + 1
    errors = np.full(count, np.nan)
    for n in range(count):
        t = n * period
        hit = np.flatnonzero(np.abs(run.times - t) <= _TIME_RTOL * max(1.0, t))
        if hit.size:
            errors[n] = float(np.max(np.abs(run.states[hit[0]] - ref)))
    missing = int(np.isnan(errors).sum())
    if missing:
        logger.warning("per_period_error: %d of %d periods were not sampled", missing, count)
    return errors


def error_growth_fit(errors: np.ndarray) -> GrowthFit:
    """Fit an error-per-period series linearly and quadratically in ``n``.

    *nan* entries are skipped.

    Raises:
        ConfigurationError: If fewer than four finite entries remain.
    """
    e = np.asarray(errors, dtype=float)
    n = np.arange(e.shape[0], dtype=float)
    keep = np.isfinite(e)
    if keep.sum() < 4:
        raise ConfigurationError("error_growth_fit needs at least four sampled periods")
    linear, r2, sse_linear = polyfit_quality(n[keep], e[keep], 1)
    _, _, sse_quadratic = polyfit_quality(n[keep], e[keep], 2)
    # residuals below 0.1% of the largest error count as a perfect fit for both models
    floor = keep.sum() * (_GROWTH_FIT_RESOLUTION * float(np.max(np.abs(e[keep])))) ** 2
    gain = (sse_linear + floor) / (sse_quadratic + floor) if floor > 0.0 else 1.0
    return GrowthFit(linear_slope=float(linear[0]), linear_r2=r2, quadratic_gain=float(gain))


class StudiesMixin(StepperMixin):
    def reference_solution(
        self,
        problem: ProblemDefinition,
        y0: np.ndarray,
        t_end: float,
        n_steps: int,
    ) -> np.ndarray:
        """High-accuracy ``y(t_end)`` from 8-stage Gauss collocation.

        The integration is repeated with ``2 * n_steps`` steps; the halved-step
        result is returned and its Richardson error estimate is logged.

        Raises:
            NumericalError: If the reference integration fails.
        """
        if n_steps < 1 or not t_end > 0:
            raise ConfigurationError("reference_solution needs t_end > 0 and n_steps >= 1")
        integrator = type(self)(gauss(REFERENCE_STAGES), solver=SolverSettings(tol=REFERENCE_TOL))
        coarse = integrator.integrate_fixed(
            problem, None, y0, t_end / n_steps, n_steps, n_steps, monitor=False
        )
        _raise_on_failure(coarse)
        fine = integrator.integrate_fixed(
            problem, None, y0, t_end / (2 * n_steps), 2 * n_steps, 2 * n_steps, monitor=False
        )
        _raise_on_failure(fine)
        difference = float(np.max(np.abs(fine.final_state - coarse.final_state)))
        estimate = difference / (2.0 ** (2 * REFERENCE_STAGES) - 1.0)
        logger.info(
            "reference solution: %d steps of %.3e, Richardson error estimate %.3e",
            2 * n_steps,
            t_end / (2 * n_steps),
            estimate,
        )
        return fine.final_state

    def convergence_study(
        self,
        problem: ProblemDefinition,
        y0: np.ndarray,
        t_end: float,
        h_list: np.ndarray | list[float],
        reference: np.ndarray | None = None,
        invariants: InvariantSet | None = None,
    ) -> ConvergenceStudy:
        """Observed order of the bound method from errors at *t_end*.

        Every stepsize in *h_list* must divide *t_end*.  Without *reference*
        one is computed by :meth:`reference_solution` at a quarter of the
        smallest stepsize.  Errors at the roundoff floor are excluded from the
        fit and reported through ``floor_hit``.

        Raises:
            ConfigurationError: For fewer than two stepsizes or one that does
                not divide *t_end*.
            NumericalError: If any run fails.
        """
        h = np.sort(np.asarray(h_list, dtype=float))[::-1]
        if h.shape[0] < 2:
            raise ConfigurationError("convergence_study needs at least two stepsizes")
        steps = [_steps_for(t_end, hi) for hi in h]
        if reference is None:
            reference = self.reference_solution(problem, y0, t_end, REFERENCE_REFINEMENT * steps[-1])
        errors = np.empty(h.shape[0])
        for i, (hi, n) in enumerate(zip(h, steps)):
            run = self.integrate_fixed(problem, invariants, y0, t_end / n, n, n, monitor=False)
            _raise_on_failure(run)
            errors[i] = float(np.max(np.abs(run.final_state - reference)))
            logger.debug("convergence_study: h=%.3e error=%.3e", hi, errors[i])
        study = loglog_order(h, errors)
        logger.info("convergence_study: observed order %.3f over %d stepsizes", study.order, h.shape[0])
        return study
