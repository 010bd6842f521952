from __future__ import annotations

from typing import Callable

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from lineint import systems
from lineint.systems import Benchmark, ProblemDefinition


def rotation(omega: float) -> ProblemDefinition:
    """Harmonic oscillator ``y' = [[0, omega], [-omega, 0]] y``; the flow is a rotation."""
    J = np.array([[0.0, omega], [-omega, 0.0]])
    return systems.generic(lambda y: J @ y, 2, lambda y: J, description=f"rotation({omega:g})")


def rotation_exact(omega: float, y0: np.ndarray, t: float) -> np.ndarray:
    c, s = np.cos(omega * t), np.sin(omega * t)
    return np.array([[c, s], [-s, c]]) @ y0


@pytest.fixture
def kepler06() -> Benchmark:
    return systems.kepler(0.6)


@pytest.fixture
def lotka() -> Benchmark:
    return systems.lotka_volterra()


@pytest.fixture
def reference_flow() -> Callable[[ProblemDefinition, np.ndarray, np.ndarray], np.ndarray]:
    """Dense DOP853 flow, an oracle independent of the package's integrators."""

    def flow(problem: ProblemDefinition, y0: np.ndarray, t_eval: np.ndarray) -> np.ndarray:
        t_eval = np.atleast_1d(np.asarray(t_eval, dtype=float))
        sol = solve_ivp(
            lambda t, y: problem.rhs(y),
            (0.0, float(t_eval[-1])),
            np.asarray(y0, dtype=float),
            method="DOP853",
            t_eval=t_eval,
            rtol=1e-13,
            atol=1e-13,
        )
        assert sol.success, sol.message
        return sol.y.T

    return flow
