"""Variable-stepsize runs with a step-doubling error estimate."""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np

from lineint._logging import logger
from lineint.errors import ConfigurationError, LineIntegralError, StepSizeUnderflowError
from lineint.runs._mixin_base import StepperMixin
from lineint.systems import InvariantSet, ProblemDefinition
from lineint.types.runs import AdaptiveSettings, IntegrationRun


def next_stepsize(h_old: float, error: float, order: int, settings: AdaptiveSettings) -> float:
    """Controller update ``safety * h_old * (tol / error) ** (1 / (order + 1))``.

    The ratio ``h_new / h_old`` is capped at ``settings.growth_cap`` and the
    result at ``settings.h_max``.  A zero error grows by the cap; a non-finite
    error halves the step.
    """
    if not np.isfinite(error):
        factor = 0.5
    elif error == 0.0:
        factor = settings.growth_cap
    else:
        factor = min(
            settings.growth_cap,
            settings.safety * (settings.tol / error) ** (1.0 / (order + 1)),
        )
    return min(h_old * factor, settings.h_max)


def _stops(t_end: float, checkpoints: Iterable[float] | None) -> list[float]:
    # checkpoints within rounding of t_end would leave a sliver step
    inner = sorted({float(c) for c in checkpoints or () if 0.0 < c < t_end * (1.0 - 1e-12)})
    return [*inner, float(t_end)]


class AdaptiveMixin(StepperMixin):
    def integrate_adaptive(
        self,
        problem: ProblemDefinition,
        invariants: InvariantSet | None,
        y0: np.ndarray,
        t_end: float,
        settings: AdaptiveSettings | None = None,
        *,
        checkpoints: Iterable[float] | None = None,
        monitor: bool = True,
    ) -> IntegrationRun:
        """Integrate to *t_end* with local-error control.

        Each trial step of size ``h`` is compared with two steps of ``h/2``;
        the max-norm of the difference is the error estimate.  An accepted
        step keeps the two-half-step state.  Steps are shortened to land
        exactly on every checkpoint and on *t_end*; checkpoints inside the
        interval are always sampled, so per-period errors can be read off a
        run whose checkpoints are the period multiples.

        A step that raises a retryable error counts as a rejection and is
        retried with half the stepsize.

        Returns:
            The run.  It ends early with ``failed`` set when the controller
            asks for ``h < h_min``, when ``max_rejections`` consecutive trials
            are rejected, or on a non-retryable error.

        Raises:
            ConfigurationError: If *t_end* is not positive.
        """
        if not (np.isfinite(t_end) and t_end > 0):
            raise ConfigurationError(f"integrate_adaptive needs t_end > 0, got {t_end}")
        settings = settings or AdaptiveSettings()
        stops = _stops(t_end, checkpoints)
        y = np.array(y0, dtype=float)
        recorder = self._recorder(invariants if monitor else None, y)
        t = 0.0
        h = settings.h_init
        stop_index = 0
        accepted = 0
        rejections = 0
        consecutive = 0

        while stop_index < len(stops):
            target = stops[stop_index]
            remaining = target - t
            hits = h >= remaining
            trial = remaining if hits else h
            index = accepted + 1
            try:
                full = self._step(problem, y, trial, invariants=invariants, step_index=index)
                half = self._step(problem, y, 0.5 * trial, invariants=invariants, step_index=index)
                second = self._step(problem, half.y1, 0.5 * trial, invariants=invariants, step_index=index)
                error = float(np.max(np.abs(second.y1 - full.y1)))
            except LineIntegralError as exc:
                if not exc.retryable:
                    return self._finish_run(recorder, rejections=rejections, error=exc)
                logger.debug("step %d rejected: %s", index, exc.message)
                error = float("inf")

            h_new = next_stepsize(trial, error, self.order, settings)
            if error <= settings.tol:
                accepted = index
                consecutive = 0
                y = second.y1
                t = target if hits else t + trial
                recorder.accept(trial, full.iterations + half.iterations + second.iterations)
                recorder.sample(t, y)
                if hits:
                    stop_index += 1
                    # keep h after a step shortened to reach a stop
                    h_new = max(h_new, min(h, settings.h_max))
                logger.debug("step %d accepted: t=%.6g h=%.3e err=%.3e h_new=%.3e", index, t, trial, error, h_new)
            else:
                rejections += 1
                consecutive += 1
                logger.debug("step %d rejected: h=%.3e err=%.3e h_new=%.3e", index, trial, error, h_new)
                if consecutive >= settings.max_rejections:
                    failure = StepSizeUnderflowError(
                        f"{consecutive} consecutive rejections (last error {error:.3e})"
                    ).located(h=trial, step_index=index)
                    return self._finish_run(recorder, rejections=rejections, error=failure)
            if stop_index < len(stops) and h_new < settings.h_min:
                failure = StepSizeUnderflowError(
                    f"requested stepsize {h_new:.3e} below h_min={settings.h_min:.3e} at t={t:.6g}"
                ).located(h=trial, step_index=index)
                return self._finish_run(recorder, rejections=rejections, error=failure)
            h = h_new

        logger.info(
            "adaptive run finished: %d steps, %d rejections, t_end=%.6g",
            accepted,
            rejections,
            t_end,
        )
        return self._finish_run(recorder, rejections=rejections)
