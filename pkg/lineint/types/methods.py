from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from lineint.errors import ConfigurationError
from lineint.types.quadrature import QuadratureRule, SpectralMatrices, _frozen


@dataclass(frozen=True)
class ButcherTableau:
    """Runge-Kutta coefficients ``c | A / b^T``.

    ``rank_hint`` records the expected rank of ``A`` (``s`` for HBVM(k, s),
    1 for the trapezoidal rules).  ``mono_implicit`` marks tableaux with
    ``A = c b^T``, whose stages are affine in ``y1``.
    """

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    order: int
    rank_hint: int
    name: str = ""
    mono_implicit: bool = False

    def __post_init__(self) -> None:
        for attr in ("A", "b", "c"):
            object.__setattr__(self, attr, _frozen(getattr(self, attr)))
        k = self.b.shape[0]
        if self.A.shape != (k, k) or self.c.shape != (k,):
            raise ConfigurationError(
                f"inconsistent tableau shapes A={self.A.shape}, b={self.b.shape}, c={self.c.shape}"
            )

    @property
    def stages(self) -> int:
        return self.b.shape[0]


@dataclass(frozen=True)
class HBVMConfig:
    """HBVM(k, s): degree-``s`` polynomial, ``k``-point Gauss quadrature."""

    k: int
    s: int
    matrices: SpectralMatrices

    def __post_init__(self) -> None:
        if not self.k >= self.s >= 1:
            raise ConfigurationError(f"HBVM needs k >= s >= 1, got k={self.k}, s={self.s}")

    @property
    def order(self) -> int:
        return 2 * self.s

    @property
    def name(self) -> str:
        if self.k == self.s:
            return f"gauss({self.s})"
        return f"hbvm({self.k},{self.s})"


@dataclass(frozen=True)
class LIMConfig:
    """LIM(r, k, s): HBVM(k, s) plus an ``r``-point rule for the invariant gradients.

    Attributes:
        r: Nodes of the invariant quadrature (0 disables the correction).
        k: Nodes of the vector-field quadrature.
        s: Polynomial degree.
        matrices: :class:`SpectralMatrices` for ``(k, s)``.
        gamma_rule: ``k``-point Gauss rule.
        phi_rule: ``r``-point Gauss rule, *None* when ``r == 0``.
        phi_P: ``r x s`` matrix ``P_j(tau_l)``.
        phi_I: ``r x s`` matrix ``int_0^{tau_l} P_j``.
    """

    r: int
    k: int
    s: int
    matrices: SpectralMatrices
    gamma_rule: QuadratureRule
    phi_rule: QuadratureRule | None
    phi_P: np.ndarray = field(repr=False)
    phi_I: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if not self.k >= self.s >= 1:
            raise ConfigurationError(f"LIM needs k >= s >= 1, got k={self.k}, s={self.s}")
        if self.r != 0 and self.r < self.s:
            raise ConfigurationError(f"LIM needs r == 0 or r >= s, got r={self.r}, s={self.s}")
        if (self.r == 0) != (self.phi_rule is None):
            raise ConfigurationError("phi_rule must be given exactly when r > 0")
        object.__setattr__(self, "phi_P", _frozen(self.phi_P))
        object.__setattr__(self, "phi_I", _frozen(self.phi_I))

    @property
    def order(self) -> int:
        return 2 * self.s

    @property
    def name(self) -> str:
        return f"lim({self.r},{self.k},{self.s})"

    def as_hbvm(self) -> HBVMConfig:
        return HBVMConfig(k=self.k, s=self.s, matrices=self.matrices)


Method = HBVMConfig | LIMConfig | ButcherTableau


@dataclass(frozen=True)
class StepResult:
    """Outcome of one step from ``y0`` with stepsize ``h``.

    Attributes:
        y1: New approximation.
        gamma_hat: ``s x m`` discrete Fourier-Legendre coefficients of ``f``
            along the step polynomial (empty for plain Runge-Kutta steps).
        phi_hat: ``s x m x nu`` coefficients of the enforced invariant
            gradients (``nu == 0`` without correction).
        alpha: Multiplier of the correction ``-phi_hat[0] @ alpha``.
        stages: ``k x m`` stage values ``u(c_i h)``.
        iterations: Nonlinear iterations performed.
        converged: Whether the iteration met its tolerance.
        solver_residual: ``|F|_inf`` at the returned iterate.
        y0: Starting point.
        h: Stepsize.
    """

    y1: np.ndarray
    gamma_hat: np.ndarray
    phi_hat: np.ndarray
    alpha: np.ndarray
    stages: np.ndarray
    iterations: int
    converged: bool
    solver_residual: float
    y0: np.ndarray = field(repr=False)
    h: float = 0.0

    @property
    def coefficients(self) -> np.ndarray:
        """Legendre coefficients of ``u'``: ``gamma_hat`` with ``gamma_0 - phi_0 alpha``."""
        coeffs = np.array(self.gamma_hat, dtype=float)
        if self.alpha.size:
            coeffs[0] -= self.phi_hat[0] @ self.alpha
        return coeffs

    def evaluate(self, c: float | np.ndarray) -> np.ndarray:
        """Evaluate the step polynomial ``u(c h)`` for ``c`` in [0, 1].

        Raises:
            ConfigurationError: For plain Runge-Kutta steps, which carry no
                polynomial.
        """
        from lineint.legendre import legendre_integrals

        if self.gamma_hat.shape[0] == 0:
            raise ConfigurationError("this step carries no polynomial representation")
        s = self.gamma_hat.shape[0]
        points = np.atleast_1d(np.asarray(c, dtype=float))
        values = self.y0 + self.h * legendre_integrals(s, points) @ self.coefficients
        return values[0] if np.ndim(c) == 0 else values
