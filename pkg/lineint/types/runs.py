from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from lineint.errors import ConfigurationError


@dataclass(frozen=True)
class AdaptiveSettings:
    """Local-error controller ``h_new = safety * h_old * (tol / |e|)^(1/(p+1))``.

    Attributes:
        tol: Local-error tolerance.
        safety: Safety factor in (0, 1).
        h_init: First trial stepsize.
        h_min: Smallest admissible stepsize.
        h_max: Largest admissible stepsize.
        growth_cap: Maximum ratio ``h_new / h_old``.
        max_rejections: Consecutive rejections before the run fails.
    """

    tol: float = 1e-8
    safety: float = 0.85
    h_init: float = 1e-2
    h_min: float = 1e-12
    h_max: float = 1.0
    growth_cap: float = 5.0
    max_rejections: int = 20

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ConfigurationError(f"adaptive tol must be positive, got {self.tol}")
        if not 0 < self.safety < 1:
            raise ConfigurationError(f"safety must lie in (0, 1), got {self.safety}")
        if not 0 < self.h_min <= self.h_init <= self.h_max:
            raise ConfigurationError(
                f"need 0 < h_min <= h_init <= h_max, got {self.h_min}, {self.h_init}, {self.h_max}"
            )
        if not self.growth_cap > 1:
            raise ConfigurationError(f"growth_cap must exceed 1, got {self.growth_cap}")
        if self.max_rejections < 1:
            raise ConfigurationError("max_rejections must be >= 1")


@dataclass
class IntegrationRun:
    """Sampled trajectory of a multi-step integration.

    ``invariant_errors[n]`` holds ``L(y_n) - L(y_0)`` for the sample at
    ``times[n]``; its first row is exactly zero.  When a step fails the run
    is returned up to the last accepted step with :attr:`failed` set.
    """

    times: np.ndarray
    states: np.ndarray
    invariant_errors: np.ndarray
    step_sizes: np.ndarray
    rejections: int = 0
    solver_stats: dict[str, int] = field(default_factory=dict)
    failed: bool = False
    failure: str | None = None
    error: Exception | None = field(default=None, repr=False)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def max_invariant_errors(self) -> np.ndarray:
        """Per-invariant maximum of ``|L(y_n) - L(y_0)|`` over the samples."""
        if self.invariant_errors.shape[1] == 0:
            return np.zeros(0)
        return np.max(np.abs(self.invariant_errors), axis=0)


@dataclass(frozen=True)
class ConvergenceStudy:
    """Errors of a stepsize sweep and the fitted order.

    ``fitted`` flags the ``(h, error)`` pairs kept in the least-squares fit
    once errors at the roundoff floor are dropped.
    """

    h: np.ndarray
    errors: np.ndarray
    order: float
    fitted: np.ndarray
    floor_hit: bool

    @property
    def local_orders(self) -> np.ndarray:
        """Observed order between consecutive stepsizes."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(self.errors[:-1] / self.errors[1:]) / np.log(self.h[:-1] / self.h[1:])


@dataclass(frozen=True)
class GrowthFit:
    """Linear and quadratic least-squares fits of an error series against the period index.

    ``quadratic_gain`` is the ratio of the linear to the quadratic sum of
    squared residuals, each padded by a floor of ``(1e-3 max|e|)^2`` per
    point so that both fits read as perfect once their residuals are below
    that resolution.  Large values mean the growth is not linear.
    """

    linear_slope: float
    linear_r2: float
    quadratic_gain: float

    @property
    def is_linear(self) -> bool:
        return self.linear_slope > 0.0 and self.linear_r2 >= 0.9 and self.quadratic_gain < 2.0


@dataclass(frozen=True)
class StabilityScan:
    """``|R(q)|`` on a grid; ``singular`` flags points where ``I - qA`` is singular."""

    q: np.ndarray
    modulus: np.ndarray
    singular: np.ndarray
