"""Problem definitions, invariant sets and the built-in benchmark problems.

Canonical Hamiltonian states are ordered ``(q, p)``; for the Kepler problem
that is ``(q1, q2, p1, p2)``.  All gradients and Jacobians are analytic.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from lineint.errors import ConfigurationError, DimensionError, DomainError, ParameterError

VectorField = Callable[[np.ndarray], np.ndarray]
MatrixField = Callable[[np.ndarray], np.ndarray]
ScalarField = Callable[[np.ndarray], float]

KEPLER_MIN_RADIUS = 1e-12
LOTKA_VOLTERRA_PERIOD = 2.878130103817


@dataclass(frozen=True)
class ProblemDefinition:
    """An autonomous first-order system ``y' = f(y)`` of dimension :attr:`dim`."""

    dim: int
    f: VectorField
    jacobian: MatrixField | None = None
    description: str = ""

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise DimensionError(f"problem dimension must be >= 1, got {self.dim}")

    def rhs(self, y: np.ndarray) -> np.ndarray:
        """Evaluate ``f(y)`` and check the output dimension."""
        out = np.asarray(self.f(y), dtype=float)
        if out.shape != (self.dim,):
            raise DimensionError(
                f"{self.description or 'vector field'} returned shape {out.shape}, "
                f"expected ({self.dim},)"
            )
        return out

    def rhs_many(self, Y: np.ndarray) -> np.ndarray:
        """Evaluate ``f`` row by row on a ``n x dim`` array of states."""
        return np.array([self.rhs(y) for y in Y]).reshape(Y.shape[0], self.dim)

    @property
    def has_jacobian(self) -> bool:
        return self.jacobian is not None

    def reversed(self) -> ProblemDefinition:
        """The problem ``z' = -f(z)``, which retraces trajectories backwards in time."""
        f, jac = self.f, self.jacobian
        return dataclasses.replace(
            self,
            f=lambda y: -np.asarray(f(y), dtype=float),
            jacobian=None if jac is None else (lambda y: -np.asarray(jac(y), dtype=float)),
            description=f"reversed {self.description}".strip(),
        )


@dataclass(frozen=True)
class HamiltonianSystem(ProblemDefinition):
    """Canonical Hamiltonian system ``y' = J grad H(y)`` with ``y = (q, p)``.

    Build instances with :meth:`from_hamiltonian`, which derives ``f`` and its
    Jacobian from ``H``, ``grad H`` and (optionally) the Hessian.
    """

    H: ScalarField | None = None
    gradH: VectorField | None = None
    polynomial_degree: int | None = None

    @property
    def half_dim(self) -> int:
        return self.dim // 2

    @classmethod
    def from_hamiltonian(
        cls,
        half_dim: int,
        H: ScalarField,
        gradH: VectorField,
        *,
        hessH: MatrixField | None = None,
        polynomial_degree: int | None = None,
        description: str = "",
    ) -> HamiltonianSystem:
        m = half_dim

        def f(y: np.ndarray) -> np.ndarray:
            g = gradH(y)
            return np.concatenate([g[m:], -g[:m]])

        jacobian = None
        if hessH is not None:

            def jacobian(y: np.ndarray) -> np.ndarray:
                Hs = hessH(y)
                return np.vstack([Hs[m:, :], -Hs[:m, :]])

        return cls(
            dim=2 * m,
            f=f,
            jacobian=jacobian,
            description=description,
            H=H,
            gradH=gradH,
            polynomial_degree=polynomial_degree,
        )


@dataclass(frozen=True)
class PoissonSystem(ProblemDefinition):
    """Poisson system ``y' = B(y) grad H(y)`` with a skew-symmetric ``B``."""

    B: MatrixField | None = None
    H: ScalarField | None = None
    gradH: VectorField | None = None

    @classmethod
    def from_structure(
        cls,
        dim: int,
        B: MatrixField,
        H: ScalarField,
        gradH: VectorField,
        *,
        jacobian: MatrixField | None = None,
        description: str = "",
    ) -> PoissonSystem:
        return cls(
            dim=dim,
            f=lambda y: B(y) @ gradH(y),
            jacobian=jacobian,
            description=description,
            B=B,
            H=H,
            gradH=gradH,
        )


@dataclass(frozen=True)
class InvariantSet:
    """A vector of first integrals ``L: R^m -> R^nu``.

    Attributes:
        nu: Number of invariants.
        L: Map returning the ``nu`` invariant values.
        gradL: Map returning the ``m x nu`` matrix whose columns are the gradients.
        enforce_mask: Which invariants a LIM step enforces; all by default.
            Unmasked invariants are still monitored.
        names: Column labels used in reports.
    """

    nu: int
    L: Callable[[np.ndarray], np.ndarray]
    gradL: MatrixField
    enforce_mask: np.ndarray = field(default=None)  # type: ignore[assignment]
    names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        mask = np.ones(self.nu, dtype=bool) if self.enforce_mask is None else self.enforce_mask
        mask = np.array(mask, dtype=bool).reshape(-1)
        if mask.shape != (self.nu,):
            raise DimensionError(f"enforce_mask has length {mask.size}, expected {self.nu}")
        mask.setflags(write=False)
        object.__setattr__(self, "enforce_mask", mask)
        if not self.names:
            object.__setattr__(self, "names", tuple(f"L{i}" for i in range(self.nu)))
        elif len(self.names) != self.nu:
            raise DimensionError(f"got {len(self.names)} invariant names for nu={self.nu}")

    @property
    def enforced_count(self) -> int:
        return int(self.enforce_mask.sum())

    def values(self, y: np.ndarray) -> np.ndarray:
        out = np.asarray(self.L(y), dtype=float).reshape(-1)
        if out.shape != (self.nu,):
            raise DimensionError(f"invariant map returned {out.shape}, expected ({self.nu},)")
        return out

    def gradients(self, y: np.ndarray) -> np.ndarray:
        grads = np.asarray(self.gradL(y), dtype=float)
        if grads.shape != (np.size(y), self.nu):
            raise DimensionError(
                f"invariant gradients have shape {grads.shape}, expected ({np.size(y)}, {self.nu})"
            )
        return grads

    def enforced_gradients(self, y: np.ndarray) -> np.ndarray:
        """Columns of :meth:`gradients` selected by :attr:`enforce_mask`."""
        return self.gradients(y)[:, self.enforce_mask]

    def with_mask(self, mask: np.ndarray | list[bool] | tuple[bool, ...]) -> InvariantSet:
        return dataclasses.replace(self, enforce_mask=np.array(mask, dtype=bool))

    def select(self, names: list[str] | tuple[str, ...]) -> InvariantSet:
        """Enforce exactly the invariants called *names*."""
        unknown = set(names) - set(self.names)
        if unknown:
            raise ConfigurationError(
                f"unknown invariant(s) {sorted(unknown)}; available: {list(self.names)}"
            )
        return self.with_mask([n in names for n in self.names])


class Benchmark(NamedTuple):
    problem: ProblemDefinition
    invariants: InvariantSet
    y0: np.ndarray
    period: float


def check_invariant_orthogonality(
    problem: ProblemDefinition, invariants: InvariantSet, y: np.ndarray
) -> np.ndarray:
    """Return ``grad L(y)^T f(y)``, which vanishes for true first integrals.

    Raises:
        DimensionError: If the state, problem and invariant dimensions disagree.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (problem.dim,):
        raise DimensionError(f"state has shape {y.shape}, problem dimension is {problem.dim}")
    return invariants.gradients(y).T @ problem.rhs(y)


def generic(
    f: VectorField,
    dim: int,
    jacobian: MatrixField | None = None,
    *,
    description: str = "generic",
) -> ProblemDefinition:
    """Wrap a user vector field; without *jacobian* solvers fall back to finite differences."""
    return ProblemDefinition(dim=dim, f=f, jacobian=jacobian, description=description)


# ----------------------------------------------------------------------
# Kepler
# ----------------------------------------------------------------------


def _kepler_radius(y: np.ndarray) -> float:
    r = float(np.hypot(y[0], y[1]))
    if not r >= KEPLER_MIN_RADIUS:
        raise DomainError(f"Kepler field evaluated at |q| = {r:.3e} (collision)")
    return r


def kepler(eps: float) -> Benchmark:
    """Two-body problem ``H = |p|^2/2 - 1/|q|`` with eccentricity *eps*.

    The invariants are, in order, the Hamiltonian ``H``, the angular momentum
    ``L = q1 p2 - q2 p1`` and the second Laplace-Runge-Lenz component
    ``F = q2 p1^2 - q1 p1 p2 - q2/|q|``.  The orbit starts at the pericentre
    ``(1 - eps, 0, 0, sqrt((1 + eps)/(1 - eps)))`` and has period ``2 pi``.

    Raises:
        DomainError: If *eps* is outside ``[0, 1)``.
    """
    if not 0.0 <= eps < 1.0:
        raise DomainError(f"Kepler eccentricity must lie in [0, 1), got {eps}")

    def H(y: np.ndarray) -> float:
        r = _kepler_radius(y)
        return 0.5 * (y[2] ** 2 + y[3] ** 2) - 1.0 / r

    def gradH(y: np.ndarray) -> np.ndarray:
        r3 = _kepler_radius(y) ** 3
        return np.array([y[0] / r3, y[1] / r3, y[2], y[3]])

    def hessH(y: np.ndarray) -> np.ndarray:
        r = _kepler_radius(y)
        q = y[:2]
        out = np.zeros((4, 4))
        out[:2, :2] = np.eye(2) / r**3 - 3.0 * np.outer(q, q) / r**5
        out[2:, 2:] = np.eye(2)
        return out

    def L(y: np.ndarray) -> np.ndarray:
        q1, q2, p1, p2 = y
        r = _kepler_radius(y)
        return np.array(
            [
                0.5 * (p1 * p1 + p2 * p2) - 1.0 / r,
                q1 * p2 - q2 * p1,
                q2 * p1 * p1 - q1 * p1 * p2 - q2 / r,
            ]
        )

    def gradL(y: np.ndarray) -> np.ndarray:
        q1, q2, p1, p2 = y
        r = _kepler_radius(y)
        r3 = r**3
        return np.array(
            [
                [q1 / r3, p2, -p1 * p2 + q1 * q2 / r3],
                [q2 / r3, -p1, p1 * p1 - 1.0 / r + q2 * q2 / r3],
                [p1, -q2, 2.0 * q2 * p1 - q1 * p2],
                [p2, q1, -q1 * p1],
            ]
        )

    problem = HamiltonianSystem.from_hamiltonian(
        2, H, gradH, hessH=hessH, description=f"kepler(eps={eps:g})"
    )
    invariants = InvariantSet(nu=3, L=L, gradL=gradL, names=("H", "L", "F"))
    y0 = np.array([1.0 - eps, 0.0, 0.0, np.sqrt((1.0 + eps) / (1.0 - eps))])
    return Benchmark(problem, invariants, y0, 2.0 * np.pi)


# ----------------------------------------------------------------------
# Lotka-Volterra (Poisson form)
# ----------------------------------------------------------------------


def lotka_volterra(
    a: float = -2.0,
    b: float = -1.0,
    c: float = -0.5,
    nu_p: float = 1.0,
    mu_p: float = 2.0,
) -> Benchmark:
    """Three-species Lotka-Volterra system in Poisson form.

    ``H = ab y1 + y2 - a y3 + nu log y2 - mu log y3`` is the Hamiltonian and
    ``C = ab log y1 - b log y2 + log y3`` a Casimir of the structure matrix.
    The invariants are ``(H, C)``.  The start point is ``(1, 1.9, 0.5)``;
    the returned period is exact for the default parameters only and *nan*
    otherwise.

    Raises:
        ParameterError: Unless ``abc = -1``.
    """
    if abs(a * b * c + 1.0) > 1e-12:
        raise ParameterError(f"Lotka-Volterra needs abc = -1, got abc = {a * b * c!r}")

    def _check(y: np.ndarray) -> None:
        if not np.all(y > 0.0):
            raise DomainError(f"Lotka-Volterra state must be positive, got {y!r}")

    def B(y: np.ndarray) -> np.ndarray:
        y1, y2, y3 = y
        return np.array(
            [
                [0.0, c * y1 * y2, b * c * y1 * y3],
                [-c * y1 * y2, 0.0, -y2 * y3],
                [-b * c * y1 * y3, y2 * y3, 0.0],
            ]
        )

    def H(y: np.ndarray) -> float:
        _check(y)
        return a * b * y[0] + y[1] - a * y[2] + nu_p * np.log(y[1]) - mu_p * np.log(y[2])

    def gradH(y: np.ndarray) -> np.ndarray:
        _check(y)
        return np.array([a * b, 1.0 + nu_p / y[1], -a - mu_p / y[2]])

    def jacobian(y: np.ndarray) -> np.ndarray:
        y1, y2, y3 = y
        g = gradH(y)
        dB = (
            np.array([[0.0, c * y2, b * c * y3], [-c * y2, 0.0, 0.0], [-b * c * y3, 0.0, 0.0]]),
            np.array([[0.0, c * y1, 0.0], [-c * y1, 0.0, -y3], [0.0, y3, 0.0]]),
            np.array([[0.0, 0.0, b * c * y1], [0.0, 0.0, -y2], [-b * c * y1, y2, 0.0]]),
        )
        hess = np.diag([0.0, -nu_p / y2**2, mu_p / y3**2])
        return np.column_stack([dB[i] @ g for i in range(3)]) + B(y) @ hess

    def L(y: np.ndarray) -> np.ndarray:
        _check(y)
        casimir = a * b * np.log(y[0]) - b * np.log(y[1]) + np.log(y[2])
        return np.array([H(y), casimir])

    def gradL(y: np.ndarray) -> np.ndarray:
        _check(y)
        return np.column_stack([gradH(y), [a * b / y[0], -b / y[1], 1.0 / y[2]]])

    problem = PoissonSystem.from_structure(
        3, B, H, gradH, jacobian=jacobian, description="lotka_volterra"
    )
    invariants = InvariantSet(nu=2, L=L, gradL=gradL, names=("H", "C"))
    defaults = (a, b, c, nu_p, mu_p) == (-2.0, -1.0, -0.5, 1.0, 2.0)
    period = LOTKA_VOLTERRA_PERIOD if defaults else float("nan")
    return Benchmark(problem, invariants, np.array([1.0, 1.9, 0.5]), period)


# ----------------------------------------------------------------------
# Polynomial Hamiltonian
# ----------------------------------------------------------------------


def poly_hamiltonian(alpha: float, beta: float, n: int) -> tuple[HamiltonianSystem, InvariantSet]:
    """One-degree-of-freedom system ``H = p^2 + (beta q)^2 + alpha (q + p)^(2n)``.

    ``H`` has polynomial degree ``2n``, recorded on the returned system.
    Level curves are usually traced from :func:`poly_initial_points`.
    """
    if n < 1:
        raise ConfigurationError(f"poly_hamiltonian needs n >= 1, got {n}")
    deg = 2 * n

    def H(y: np.ndarray) -> float:
        q, p = y
        return p * p + (beta * q) ** 2 + alpha * (q + p) ** deg

    def gradH(y: np.ndarray) -> np.ndarray:
        q, p = y
        w = deg * alpha * (q + p) ** (deg - 1)
        return np.array([2.0 * beta * beta * q + w, 2.0 * p + w])

    def hessH(y: np.ndarray) -> np.ndarray:
        q, p = y
        w = deg * (deg - 1) * alpha * (q + p) ** (deg - 2)
        return np.array([[2.0 * beta * beta + w, w], [w, 2.0 + w]])

    problem = HamiltonianSystem.from_hamiltonian(
        1,
        H,
        gradH,
        hessH=hessH,
        polynomial_degree=deg,
        description=f"poly_hamiltonian(alpha={alpha:g}, beta={beta:g}, n={n})",
    )
    invariants = InvariantSet(
        nu=1,
        L=lambda y: np.array([H(y)]),
        gradL=lambda y: gradH(y).reshape(2, 1),
        names=("H",),
    )
    return problem, invariants


def poly_initial_points(count: int = 8) -> np.ndarray:
    """Start points ``(i, -i)``, ``i = 1..count``, for polynomial-Hamiltonian level curves."""
    i = np.arange(1, count + 1, dtype=float)
    return np.column_stack([i, -i])
