"""Nonlinear solvers for the Legendre-coefficient system.

The unknown is the ``s x m`` array ``G`` of coefficients (block ``j`` is
``gamma_j``).  The problem is written as the fixed point ``G = Phi(G)``;
for HBVM(k, s)

    Phi(G) = P_s^T Omega f(y0 + h I_s G),

and ``F(G) = G - Phi(G)`` is the residual.  With ``G`` stored row-major,
``(X (x) I) vec(G) = vec(X @ G)`` and ``(I (x) J) vec(G) = vec(G @ J.T)``.

Every iteration stops once ``|delta|_inf <= tol (1 + |G|_inf)``; Newton-type
iterations also stop when the residual met that bound at the start of an
iteration, which is then not counted.
"""

from __future__ import annotations

import warnings
from functools import lru_cache
from typing import Callable

import numpy as np
import scipy.linalg

from lineint._logging import _summarize, logger
from lineint.errors import ConfigurationError, DivergenceError, SingularIterationMatrixError
from lineint.legendre import x_eigenvalues
from lineint.systems import ProblemDefinition
from lineint.types.quadrature import SpectralMatrices
from lineint.types.solvers import BlendedParams, SolverDiagnostics, SolverSettings

FixedPointMap = Callable[[np.ndarray], np.ndarray]

MAX_BLENDED_DEGREE = 16


# ----------------------------------------------------------------------
# Building blocks
# ----------------------------------------------------------------------


def coefficient_map(
    problem: ProblemDefinition,
    y0: np.ndarray,
    h: float,
    matrices: SpectralMatrices,
) -> FixedPointMap:
    """Return ``G -> P_s^T Omega f(y0 + h I_s G)``."""
    PtOmega = matrices.PtOmega
    I_s = matrices.I_s

    def phi(G: np.ndarray) -> np.ndarray:
        return PtOmega @ problem.rhs_many(y0 + h * (I_s @ G))

    return phi


def initial_guess(problem: ProblemDefinition, y0: np.ndarray, s: int) -> np.ndarray:
    """``gamma_0 = f(y0)`` and the higher coefficients zero."""
    G = np.zeros((s, problem.dim))
    G[0] = problem.rhs(y0)
    return G


def finite_difference_jacobian(problem: ProblemDefinition, y: np.ndarray) -> np.ndarray:
    """Forward-difference Jacobian with steps ``sqrt(eps) (1 + |y_i|)``."""
    y = np.asarray(y, dtype=float)
    f0 = problem.rhs(y)
    steps = np.sqrt(np.finfo(float).eps) * (1.0 + np.abs(y))
    J = np.empty((problem.dim, problem.dim))
    for i, step in enumerate(steps):
        yp = y.copy()
        yp[i] += step
        J[:, i] = (problem.rhs(yp) - f0) / step
    return J


def evaluate_jacobian(problem: ProblemDefinition, y: np.ndarray, policy: str) -> np.ndarray:
    """``J0 = f'(y)`` per the Jacobian policy; falls back to differences when no analytic one exists."""
    if policy == "analytic" and problem.jacobian is not None:
        J = np.asarray(problem.jacobian(y), dtype=float)
    else:
        if policy == "analytic":
            logger.debug("no analytic Jacobian for %s, using finite differences", problem.description)
        J = finite_difference_jacobian(problem, y)
    if not np.all(np.isfinite(J)):
        raise DivergenceError("Jacobian contains non-finite entries")
    return J


def _factor(M: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(M)
    except ValueError as exc:
        raise SingularIterationMatrixError(f"{what} could not be factored: {exc}") from exc
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= np.finfo(float).eps * M.shape[0] * max(1.0, pivots.max()):
        raise SingularIterationMatrixError(f"{what} is singular; reduce the stepsize")
    return lu, piv


def _converged(delta: np.ndarray, G: np.ndarray, tol: float) -> tuple[float, bool]:
    inc = float(np.max(np.abs(delta)))
    return inc, inc <= tol * (1.0 + float(np.max(np.abs(G))))


def _checked(G: np.ndarray, iteration: int, kind: str) -> np.ndarray:
    if not np.all(np.isfinite(G)):
        raise DivergenceError(f"{kind}: non-finite iterate after {iteration} iteration(s)")
    return G


def _evaluate(phi: FixedPointMap, G: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        return phi(G)


def _finish(
    phi: FixedPointMap,
    G: np.ndarray,
    kind: str,
    iterations: int,
    converged: bool,
    increments: list[float],
    inner: int = 0,
) -> tuple[np.ndarray, SolverDiagnostics]:
    residual = float(np.max(np.abs(G - _evaluate(phi, G))))
    if not converged:
        logger.debug(
            "%s did not converge in %d iterations (last increment %.3e)",
            kind,
            iterations,
            increments[-1] if increments else float("nan"),
        )
    return G, SolverDiagnostics(
        iterations=iterations,
        converged=converged,
        residual=residual,
        kind=kind,
        increments=tuple(increments),
        inner_iterations=inner,
    )


# ----------------------------------------------------------------------
# Fixed-point iteration
# ----------------------------------------------------------------------


def fixed_point_solve(
    fixed_point_map: FixedPointMap,
    initial_gamma: np.ndarray,
    settings: SolverSettings,
) -> tuple[np.ndarray, SolverDiagnostics]:
    """Iterate ``G <- Phi(G)`` until the increment meets the tolerance.

    Raises:
        DivergenceError: If an iterate becomes non-finite.
    """
    G = np.array(initial_gamma, dtype=float)
    increments: list[float] = []
    converged = False
    it = 0
    for it in range(1, settings.max_outer + 1):
        new = _checked(_evaluate(fixed_point_map, G), it, "fixed_point")
        inc, converged = _converged(new - G, new, settings.tol)
        increments.append(inc)
        G = new
        if converged:
            break
    return _finish(fixed_point_map, G, "fixed_point", it, converged, increments)


# ----------------------------------------------------------------------
# Simplified Newton
# ----------------------------------------------------------------------


def newton_matrix(h: float, X: np.ndarray, J0: np.ndarray) -> np.ndarray:
    """``I - h X (x) J0``."""
    n = X.shape[0] * J0.shape[0]
    return np.eye(n) - h * np.kron(X, J0)


def newton_iterate(
    fixed_point_map: FixedPointMap,
    initial: np.ndarray,
    iteration_matrix: np.ndarray,
    settings: SolverSettings,
) -> tuple[np.ndarray, SolverDiagnostics]:
    """Iterate ``M delta = -(G - Phi(G))`` with a fixed, once-factored ``M``.

    Raises:
        SingularIterationMatrixError: If *iteration_matrix* is singular.
        DivergenceError: If an iterate becomes non-finite.
    """
    lu = _factor(iteration_matrix, "simplified Newton matrix")
    G = np.array(initial, dtype=float)
    increments: list[float] = []
    converged = False
    it = 0
    for it in range(1, settings.max_outer + 1):
        F = G - _checked(_evaluate(fixed_point_map, G), it, "simplified_newton")
        if it > 1 and _converged(F, G, settings.tol)[1]:
            converged, it = True, it - 1
            break
        delta = scipy.linalg.lu_solve(lu, -F.ravel()).reshape(G.shape)
        G = _checked(G + delta, it, "simplified_newton")
        inc, converged = _converged(delta, G, settings.tol)
        increments.append(inc)
        if converged:
            break
    return _finish(fixed_point_map, G, "simplified_newton", it, converged, increments)


def simplified_newton_solve(
    problem: ProblemDefinition,
    y0: np.ndarray,
    h: float,
    matrices: SpectralMatrices,
    settings: SolverSettings,
    *,
    jacobian: np.ndarray | None = None,
    fixed_point_map: FixedPointMap | None = None,
    initial: np.ndarray | None = None,
) -> tuple[np.ndarray, SolverDiagnostics]:
    """Solve ``F(G) = 0`` with ``[I - h X_s (x) J0] delta = -F(G)``, ``J0 = f'(y0)``.

    The ``s m x s m`` matrix is factored once per call.  *fixed_point_map*
    overrides the HBVM map (LIM steps pass their corrected map); *jacobian*
    supplies a cached ``J0``.

    Raises:
        SingularIterationMatrixError: If the iteration matrix is singular.
        DivergenceError: If an iterate becomes non-finite.
    """
    phi = fixed_point_map or coefficient_map(problem, y0, h, matrices)
    J0 = jacobian if jacobian is not None else evaluate_jacobian(problem, y0, settings.jacobian_policy)
    G0 = initial_guess(problem, y0, matrices.s) if initial is None else initial
    return newton_iterate(phi, G0, newton_matrix(h, matrices.X_s, J0), settings)


# ----------------------------------------------------------------------
# Blended iteration
# ----------------------------------------------------------------------


@lru_cache(maxsize=None)
def blended_params(s: int) -> BlendedParams:
    """Optimal blending parameter ``zeta`` and amplification factors for degree ``s``.

    ``mu_1`` is the eigenvalue of ``X_s`` of minimum modulus (upper
    half-plane); ``zeta = |mu_1|``, ``rho* = 1 - cos(arg mu_1)`` and
    ``rho~ = |mu_1 - |mu_1||^2 / |mu_1|``.

    Raises:
        ConfigurationError: If ``s`` is outside ``1..16``.
    """
    if not 1 <= s <= MAX_BLENDED_DEGREE:
        raise ConfigurationError(f"blended_params supports 1 <= s <= {MAX_BLENDED_DEGREE}, got {s}")
    mu = x_eigenvalues(s)
    moduli = np.abs(mu)
    zeta = float(moduli.min())
    candidates = mu[np.isclose(moduli, zeta, rtol=1e-10, atol=0.0)]
    mu1 = candidates[np.argmax(np.abs(np.angle(candidates)))]
    mu1 = complex(mu1.real, abs(mu1.imag))
    phi_1 = float(np.angle(mu1))
    rho_tilde = abs(mu1 - abs(mu1)) ** 2 / abs(mu1)
    eigenvalues = np.array(mu)
    eigenvalues.setflags(write=False)
    params = BlendedParams(
        s=s,
        zeta=zeta,
        rho_star=1.0 - np.cos(phi_1),
        rho_tilde=float(rho_tilde),
        phi_1=phi_1,
        eigenvalues=eigenvalues,
    )
    logger.debug(
        "blended_params(%d): zeta=%.6f rho*=%.6f rho~=%.6f",
        s,
        params.zeta,
        params.rho_star,
        params.rho_tilde,
    )
    return params


def convergence_region_scan(s: int, q_grid: np.ndarray) -> np.ndarray:
    """Spectral radius ``rho(q) = max_mu |q (mu - zeta)^2 / (mu (1 - q zeta)^2)|`` on *q_grid*.

    Raises:
        ConfigurationError: If the grid has non-finite points or points with ``Re(q) > 0``.
    """
    q = np.asarray(q_grid, dtype=complex)
    if not np.all(np.isfinite(q)):
        raise ConfigurationError("convergence_region_scan needs a finite grid")
    if np.any(q.real > 0.0):
        raise ConfigurationError("convergence_region_scan is defined on Re(q) <= 0")
    params = blended_params(s)
    mu = params.eigenvalues
    zeta = params.zeta
    qq = q[..., np.newaxis]
    ratio = qq * (mu - zeta) ** 2 / (mu * (1.0 - qq * zeta) ** 2)
    return np.max(np.abs(ratio), axis=-1)


def blended_solve(
    problem: ProblemDefinition,
    y0: np.ndarray,
    h: float,
    matrices: SpectralMatrices,
    settings: SolverSettings,
    *,
    jacobian: np.ndarray | None = None,
    fixed_point_map: FixedPointMap | None = None,
    initial: np.ndarray | None = None,
) -> tuple[np.ndarray, SolverDiagnostics]:
    """Blended iteration; only ``I - h zeta J0`` (``m x m``) is factored.

    With ``eta = F(G)`` and ``theta = I (x) (I - h zeta J0)^{-1}``:

    * ``blended_nonlinear``: ``u = (zeta X_s^{-1} (x) I) eta``,
      ``delta = theta[theta(u - eta) - u]``.
    * ``blended_outer_inner``: starting from ``delta = 0``, for ``r = 0..max_inner-1``
      with ``z = (I (x) J0) delta``,
      ``u = (zeta X_s^{-1} (x) I)(delta + eta) - h zeta z``,
      ``w = delta + eta - (h X_s (x) I) z``,
      ``delta <- delta - theta[u + theta(w - u)]``.

    Raises:
        SingularIterationMatrixError: If ``I - h zeta J0`` is singular.
        DivergenceError: If an iterate becomes non-finite.
    """
    if settings.kind not in ("blended_nonlinear", "blended_outer_inner"):
        raise ConfigurationError(f"blended_solve cannot run solver kind {settings.kind!r}")
    phi = fixed_point_map or coefficient_map(problem, y0, h, matrices)
    J0 = jacobian if jacobian is not None else evaluate_jacobian(problem, y0, settings.jacobian_policy)
    s, m = matrices.s, problem.dim
    zeta = blended_params(s).zeta
    X = matrices.X_s
    zXinv = zeta * np.linalg.inv(X)
    lu = _factor(np.eye(m) - h * zeta * J0, "blended matrix")

    def theta(V: np.ndarray) -> np.ndarray:
        return scipy.linalg.lu_solve(lu, V.T).T

    outer_inner = settings.kind == "blended_outer_inner"
    G = initial_guess(problem, y0, s) if initial is None else np.array(initial, dtype=float)
    increments: list[float] = []
    converged = False
    inner_total = 0
    it = 0
    for it in range(1, settings.max_outer + 1):
        eta = G - _checked(_evaluate(phi, G), it, settings.kind)
        if it > 1 and _converged(eta, G, settings.tol)[1]:
            converged, it = True, it - 1
            break
        if outer_inner:
            delta = np.zeros_like(G)
            for r in range(settings.max_inner):
                if r == 0:
                    u = zXinv @ eta
                    w = eta
                else:
                    z = delta @ J0.T
                    u = zXinv @ (delta + eta) - h * zeta * z
                    w = delta + eta - h * (X @ z)
                step = theta(u + theta(w - u))
                delta = delta - step
                inner_total += 1
                if _converged(step, G, settings.tol)[1]:
                    break
        else:
            u = zXinv @ eta
            delta = theta(theta(u - eta) - u)
        G = _checked(G + delta, it, settings.kind)
        inc, converged = _converged(delta, G, settings.tol)
        increments.append(inc)
        if converged:
            break
    return _finish(phi, G, settings.kind, it, converged, increments, inner_total)


def solve_coefficients(
    problem: ProblemDefinition,
    y0: np.ndarray,
    h: float,
    matrices: SpectralMatrices,
    settings: SolverSettings,
    *,
    jacobian: np.ndarray | None = None,
    fixed_point_map: FixedPointMap | None = None,
    initial: np.ndarray | None = None,
) -> tuple[np.ndarray, SolverDiagnostics]:
    """Run the solver selected by ``settings.kind`` on the coefficient system."""
    phi = fixed_point_map or coefficient_map(problem, y0, h, matrices)
    if initial is None:
        initial = initial_guess(problem, y0, matrices.s)
    if settings.kind == "fixed_point":
        G, diag = fixed_point_solve(phi, initial, settings)
    elif settings.kind == "simplified_newton":
        G, diag = simplified_newton_solve(
            problem, y0, h, matrices, settings, jacobian=jacobian, fixed_point_map=phi, initial=initial
        )
    else:
        G, diag = blended_solve(
            problem, y0, h, matrices, settings, jacobian=jacobian, fixed_point_map=phi, initial=initial
        )
    logger.debug(
        "%s: h=%.6g iterations=%d residual=%.3e gamma=%s",
        diag.kind,
        h,
        diag.iterations,
        diag.residual,
        _summarize(G),
    )
    return G, diag


def newton_spectrum(h: float, s: int, J0: np.ndarray) -> np.ndarray:
    """Eigenvalues ``h mu lambda`` of ``h X_s (x) J0`` from the Kronecker structure."""
    mu = x_eigenvalues(s)
    lam = scipy.linalg.eigvals(J0)
    return (h * np.outer(mu, lam)).ravel()

