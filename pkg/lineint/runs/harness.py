"""Symmetry and linear-stability harnesses."""

from __future__ import annotations

import numpy as np

from lineint._logging import logger
from lineint.errors import ConfigurationError, SingularIterationMatrixError
from lineint.methods import stability_function
from lineint.runs._mixin_base import StepperMixin
from lineint.systems import InvariantSet, ProblemDefinition
from lineint.types.methods import Method
from lineint.types.runs import StabilityScan

SYMMETRY_TOL = 1e-14


def stability_scan(method: Method, q_grid: np.ndarray | list[complex]) -> StabilityScan:
    """``|R(q)|`` of *method* over *q_grid*.

    Each value comes from one exact linear step (a direct solve of the stage
    system).  Grid points where ``I - qA`` is singular are flagged in
    ``singular`` and carry ``modulus = inf``.
    """
    q = np.asarray(q_grid, dtype=complex).ravel()
    if not np.all(np.isfinite(q)):
        raise ConfigurationError("stability_scan grid contains non-finite points")
    modulus = np.empty(q.shape[0])
    singular = np.zeros(q.shape[0], dtype=bool)
    for i, qi in enumerate(q):
        try:
            modulus[i] = abs(stability_function(method, complex(qi)))
        except SingularIterationMatrixError:
            modulus[i] = np.inf
            singular[i] = True
    if singular.any():
        logger.warning("stability_scan: I - qA singular at %d grid points", int(singular.sum()))
    return StabilityScan(q=q, modulus=modulus, singular=singular)


class HarnessMixin(StepperMixin):
    def symmetry_defect(
        self,
        problem: ProblemDefinition,
        y0: np.ndarray,
        h: float,
        invariants: InvariantSet | None = None,
    ) -> float:
        """Max-norm of ``step(-f, step(f, y0, h), h) - y0``.

        Both steps are solved to ``tol = 1e-14``; a symmetric method returns
        to *y0* up to that tolerance.

        Raises:
            NumericalError: If either solve fails.
        """
        self._reset_cache()
        settings = self.with_solver(tol=SYMMETRY_TOL)
        forward = self._step(problem, y0, h, invariants=invariants, step_index=1, settings=settings)
        backward = self._step(
            problem.reversed(),
            forward.y1,
            h,
            invariants=invariants,
            step_index=2,
            settings=settings,
        )
        return float(np.max(np.abs(backward.y1 - np.asarray(y0, dtype=float))))

    def stability_scan(self, q_grid: np.ndarray | list[complex]) -> StabilityScan:
        return stability_scan(self.method, q_grid)
