"""Constant-stepsize runs."""

from __future__ import annotations

import numpy as np

from lineint.errors import ConfigurationError, LineIntegralError
from lineint.runs._mixin_base import StepperMixin
from lineint.systems import InvariantSet, ProblemDefinition
from lineint.types.runs import IntegrationRun


class FixedStepMixin(StepperMixin):
    def integrate_fixed(
        self,
        problem: ProblemDefinition,
        invariants: InvariantSet | None,
        y0: np.ndarray,
        h: float,
        n_steps: int,
        sample_every: int = 1,
        *,
        monitor: bool = True,
    ) -> IntegrationRun:
        """Take *n_steps* steps of size *h* from *y0*.

        Samples are recorded at ``t = 0``, every *sample_every* steps and at
        the final step.  ``invariant_errors`` holds ``L(y_n) - L(y_0)`` for
        every invariant of *invariants* (LIM methods enforce only the masked
        ones).  With ``monitor=False`` no invariant is evaluated for the
        record; the states are unaffected.

        Args:
            problem: The system to integrate.
            invariants: Invariants to enforce (LIM) and monitor; may be *None*
                for methods that do not need them.
            y0: Initial state.
            h: Stepsize, ``> 0``.
            n_steps: Number of steps, ``>= 0``.
            sample_every: Sampling stride.
            monitor: Whether to record invariant errors.

        Returns:
            The run.  A failing step ends the run early with ``failed`` set
            and the annotated error attached.

        Raises:
            ConfigurationError: For invalid *h*, *n_steps* or *sample_every*.
        """
        if not h > 0:
            raise ConfigurationError(f"integrate_fixed needs h > 0, got {h}")
        if n_steps < 0 or sample_every < 1:
            raise ConfigurationError("integrate_fixed needs n_steps >= 0 and sample_every >= 1")
        y = np.array(y0, dtype=float)
        recorder = self._recorder(invariants if monitor else None, y)
        for n in range(1, n_steps + 1):
            try:
                result = self._step(problem, y, h, invariants=invariants, step_index=n)
            except LineIntegralError as exc:
                return self._finish_run(recorder, error=exc)
            recorder.accept(h, result.iterations)
            y = result.y1
            if n % sample_every == 0 or n == n_steps:
                recorder.sample(n * h, y)
        return self._finish_run(recorder)
