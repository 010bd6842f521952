from __future__ import annotations

from typing import Any, Callable

from lineint.types.methods import Method
from lineint.types.solvers import SolverSettings


class StepperMixin:
    method: Method
    solver: SolverSettings
    order: int
    _step: Callable[..., Any]
    _recorder: Callable[..., Any]
    _finish_run: Callable[..., Any]
    with_solver: Callable[..., SolverSettings]
