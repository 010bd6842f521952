"""Line-integral integrator facade.

Usage::

    from lineint import Integrator, kepler, lim

    problem, invariants, y0, period = kepler(0.6)
    run = Integrator(lim(8, 2, 2)).integrate_fixed(problem, invariants, y0, period / 200, 2000)
    print(run.max_invariant_errors())
"""

from __future__ import annotations

from lineint._base import BaseIntegrator
from lineint._logging import set_debug as _set_debug
from lineint.runs import AdaptiveMixin, FixedStepMixin, HarnessMixin, StudiesMixin


class Integrator(
    BaseIntegrator,
    FixedStepMixin,
    AdaptiveMixin,
    HarnessMixin,
    StudiesMixin,
):
    """Multi-step driver for Gauss, HBVM, LIM and trapezoidal methods.

    Args:
        method: The method to advance with, built by :func:`lineint.gauss`,
            :func:`lineint.hbvm`, :func:`lineint.lim` or
            :func:`lineint.trapezoidal_tableau`.
        solver: Nonlinear solver settings shared by every step.
    """

    @staticmethod
    def set_debug(enabled: bool = True) -> None:
        """Enable or disable debug logging of steps, solves and controller decisions.

        Args:
            enabled: ``True`` to log to stderr at DEBUG level, ``False`` to
                turn it off.
        """
        _set_debug(enabled)
