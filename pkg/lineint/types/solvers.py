from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from lineint.errors import ConfigurationError

SolverKind = Literal[
    "fixed_point",
    "simplified_newton",
    "blended_nonlinear",
    "blended_outer_inner",
]
JacobianPolicy = Literal["analytic", "finite_difference"]

SOLVER_KINDS: tuple[str, ...] = (
    "fixed_point",
    "simplified_newton",
    "blended_nonlinear",
    "blended_outer_inner",
)


@dataclass(frozen=True)
class SolverSettings:
    """Settings of the nonlinear iteration for the coefficient system.

    Attributes:
        kind: Which iteration to run.
        tol: Increment tolerance; the iteration stops once
            ``|delta|_inf <= tol * (1 + |gamma|_inf)``.
        max_outer: Cap on outer iterations.
        max_inner: Cap on inner iterations (outer-inner blended variant only).
        jacobian_policy: Use the problem's analytic Jacobian or forward
            differences.
        reuse_jacobian: Keep ``J0`` across accepted steps of a run until a
            step needs more than ``reuse_threshold`` iterations.
        reuse_threshold: Iteration count that forces a fresh ``J0``.
    """

    kind: SolverKind = "simplified_newton"
    tol: float = 1e-13
    max_outer: int = 100
    max_inner: int = 5
    jacobian_policy: JacobianPolicy = "analytic"
    reuse_jacobian: bool = False
    reuse_threshold: int = 10

    def __post_init__(self) -> None:
        if self.kind not in SOLVER_KINDS:
            raise ConfigurationError(
                f"unknown solver kind {self.kind!r}; expected one of {', '.join(SOLVER_KINDS)}"
            )
        if not self.tol > 0:
            raise ConfigurationError(f"solver tol must be positive, got {self.tol}")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ConfigurationError("solver iteration caps must be >= 1")
        if self.jacobian_policy not in ("analytic", "finite_difference"):
            raise ConfigurationError(f"unknown jacobian policy {self.jacobian_policy!r}")
        if self.reuse_threshold < 1:
            raise ConfigurationError("reuse_threshold must be >= 1")

    @property
    def needs_jacobian(self) -> bool:
        return self.kind != "fixed_point"


@dataclass(frozen=True)
class SolverDiagnostics:
    """Outcome of one nonlinear solve.

    ``increments`` lists ``|delta|_inf`` per outer iteration; ``residual`` is
    ``|F|_inf`` re-evaluated at the returned iterate.
    """

    iterations: int
    converged: bool
    residual: float
    kind: str
    increments: tuple[float, ...] = ()
    inner_iterations: int = 0


@dataclass(frozen=True)
class BlendedParams:
    """Optimal blending parameter and amplification factors for degree ``s``.

    Attributes:
        s: Polynomial degree.
        zeta: ``min |mu|`` over the spectrum of ``X_s``.
        rho_star: Maximum amplification factor on the imaginary axis.
        rho_tilde: Non-stiff amplification factor, ``rho(q) ~ rho_tilde |q|``.
        phi_1: Argument of the minimum-modulus eigenvalue (upper half-plane).
        eigenvalues: Spectrum of ``X_s``.
    """

    s: int
    zeta: float
    rho_star: float
    rho_tilde: float
    phi_1: float
    eigenvalues: np.ndarray = field(repr=False)
