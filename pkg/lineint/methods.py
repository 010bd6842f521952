"""Gauss, HBVM(k, s), LIM(r, k, s) and s-stage trapezoidal methods.

A step of HBVM(k, s) looks for the polynomial ``u`` of degree ``s`` with
``u(0) = y0`` and

    u'(ch) = sum_j gamma_j P_j(c),    gamma_j = sum_i b_i P_j(c_i) f(u(c_i h)),

and sets ``y1 = u(h) = y0 + h gamma_0``.  LIM(r, k, s) subtracts the constant
``phi_0 alpha`` from ``u'``, where ``phi_j`` are the Legendre coefficients of
the enforced invariant gradients along ``u`` (``r``-point rule) and ``alpha``
makes the discrete line integral of ``grad L . u'`` vanish.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from lineint._fitting import loglog_order
from lineint._logging import _summarize, logger
from lineint.errors import (
    ConfigurationError,
    ConstraintDegeneracyError,
    DimensionError,
    SingularIterationMatrixError,
)
from lineint.legendre import build_matrices, gauss_rule, legendre_integrals, legendre_values
from lineint.solvers import (
    evaluate_jacobian,
    fixed_point_solve,
    initial_guess,
    newton_iterate,
    newton_matrix,
    solve_coefficients,
)
from lineint.systems import InvariantSet, ProblemDefinition
from lineint.types.methods import ButcherTableau, HBVMConfig, LIMConfig, Method, StepResult
from lineint.types.runs import ConvergenceStudy
from lineint.types.solvers import SolverDiagnostics, SolverSettings

ALPHA_FLOOR = 1e-15
_DEGENERACY_RATIO = 1e-12


# ----------------------------------------------------------------------
# Method construction
# ----------------------------------------------------------------------


def hbvm(k: int, s: int) -> HBVMConfig:
    """HBVM(k, s); raises :class:`ConfigurationError` unless ``k >= s >= 1``."""
    return HBVMConfig(k=k, s=s, matrices=build_matrices(k, s))


def gauss(s: int) -> HBVMConfig:
    """The ``s``-stage Gauss-Legendre collocation method, i.e. HBVM(s, s)."""
    return hbvm(s, s)


def lim(r: int, k: int, s: int) -> LIMConfig:
    """LIM(r, k, s): ``k``-point rule for ``f``, ``r``-point rule for the invariant gradients.

    ``r = 0`` switches the correction off (LIM(0, k, s) is HBVM(k, s)).

    Raises:
        ConfigurationError: Unless ``k >= s >= 1`` and ``r == 0 or r >= s``.
    """
    if r < 0:
        raise ConfigurationError(f"LIM needs r >= 0, got {r}")
    if r != 0 and r < s:
        raise ConfigurationError(f"LIM needs r == 0 or r >= s, got r={r}, s={s}")
    matrices = build_matrices(k, s)
    phi_rule = gauss_rule(r) if r > 0 else None
    tau = phi_rule.nodes if phi_rule is not None else np.zeros(0)
    return LIMConfig(
        r=r,
        k=k,
        s=s,
        matrices=matrices,
        gamma_rule=matrices.rule,
        phi_rule=phi_rule,
        phi_P=legendre_values(s, tau),
        phi_I=legendre_integrals(s, tau),
    )


def hbvm_tableau(k: int, s: int) -> ButcherTableau:
    """Butcher tableau ``A = I_s P_s^T Omega``, ``b`` and ``c`` of the ``k``-point Gauss rule."""
    M = build_matrices(k, s)
    return ButcherTableau(
        A=M.I_s @ M.PtOmega,
        b=M.rule.weights,
        c=M.rule.nodes,
        order=2 * s,
        rank_hint=s,
        name=f"hbvm({k},{s})",
    )


def trapezoidal_tableau(nu: int) -> ButcherTableau:
    """The ``nu``-stage trapezoidal rule: equidistant ``c``, Newton-Cotes ``b``, ``A = c b^T``.

    ``nu = 2`` is the usual trapezoidal rule; larger ``nu`` integrate the
    energy line integral more accurately while keeping order 2.
    """
    if nu < 2:
        raise ConfigurationError(f"trapezoidal rules need nu >= 2, got {nu}")
    c = np.linspace(0.0, 1.0, nu)
    V = np.vander(c, nu, increasing=True)
    b = np.linalg.solve(V.T, 1.0 / np.arange(1, nu + 1))
    return ButcherTableau(
        A=np.outer(c, b),
        b=b,
        c=c,
        order=2,
        rank_hint=1,
        name=f"trapezoidal({nu})",
        mono_implicit=True,
    )


def tableau_of(method: Method) -> ButcherTableau:
    """Runge-Kutta form of *method* (LIM methods give their underlying HBVM tableau)."""
    if isinstance(method, ButcherTableau):
        return method
    if isinstance(method, (HBVMConfig, LIMConfig)):
        return hbvm_tableau(method.k, method.s)
    raise ConfigurationError(f"unsupported method {method!r}")


# ----------------------------------------------------------------------
# Structural checks
# ----------------------------------------------------------------------


def check_symplectic(t: ButcherTableau) -> float:
    """Frobenius norm of ``BA + A^T B - b b^T`` with ``B = diag(b)``; zero for symplectic tableaux."""
    B = np.diag(t.b)
    return float(np.linalg.norm(B @ t.A + t.A.T @ B - np.outer(t.b, t.b), "fro"))


def check_simplifying(t: ButcherTableau, kind: str, order: int) -> float:
    """Largest residual of the simplifying assumption ``B(order)``, ``C(order)`` or ``D(order)``.

    * ``B(p)``: ``sum_i b_i c_i^(j-1) = 1/j`` for ``j <= p``.
    * ``C(eta)``: ``sum_j a_ij c_j^(l-1) = c_i^l / l`` for ``l <= eta``.
    * ``D(zeta)``: ``sum_i b_i c_i^(l-1) a_ij = b_j (1 - c_j^l) / l`` for ``l <= zeta``.
    """
    if order < 1:
        raise ConfigurationError(f"simplifying-assumption order must be >= 1, got {order}")
    A, b, c = t.A, t.b, t.c
    residuals = []
    for ell in range(1, order + 1):
        if kind == "B":
            residuals.append(abs(b @ c ** (ell - 1) - 1.0 / ell))
        elif kind == "C":
            residuals.append(np.max(np.abs(A @ c ** (ell - 1) - c**ell / ell)))
        elif kind == "D":
            residuals.append(np.max(np.abs((b * c ** (ell - 1)) @ A - b * (1.0 - c**ell) / ell)))
        else:
            raise ConfigurationError(f"unknown simplifying assumption {kind!r}; expected B, C or D")
    return float(max(residuals))


def stability_function(method: Method, q: complex) -> complex:
    """``R(q) = 1 + q b^T (I - qA)^{-1} e``, the amplification factor on ``y' = lambda y``.

    Raises:
        SingularIterationMatrixError: If ``I - qA`` is singular.
    """
    t = tableau_of(method)
    M = np.eye(t.stages, dtype=complex) - q * t.A
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[-1] <= np.finfo(float).eps * sv[0]:
        raise SingularIterationMatrixError(f"I - qA is singular at q={q}")
    x = np.linalg.solve(M, np.ones(t.stages, dtype=complex))
    return complex(1.0 + q * (t.b @ x))


# ----------------------------------------------------------------------
# Steps
# ----------------------------------------------------------------------


def _state(problem: ProblemDefinition, y0: np.ndarray) -> np.ndarray:
    y = np.array(y0, dtype=float)
    if y.shape != (problem.dim,):
        raise DimensionError(f"state has shape {y.shape}, problem dimension is {problem.dim}")
    return y


def _check_stepsize(h: float) -> None:
    if not (np.isfinite(h) and h >= 0.0):
        raise ConfigurationError(f"stepsize must be finite and >= 0, got {h}")


def _trivial_step(y0: np.ndarray, s: int, k: int, nu: int = 0) -> StepResult:
    m = y0.shape[0]
    return StepResult(
        y1=y0.copy(),
        gamma_hat=np.zeros((s, m)),
        phi_hat=np.zeros((s, m, nu)),
        alpha=np.zeros(nu),
        stages=np.tile(y0, (k, 1)),
        iterations=0,
        converged=True,
        solver_residual=0.0,
        y0=y0,
        h=0.0,
    )


def _plain_result(
    y0: np.ndarray,
    y1: np.ndarray,
    stages: np.ndarray,
    h: float,
    diag: SolverDiagnostics | None = None,
) -> StepResult:
    m = y0.shape[0]
    return StepResult(
        y1=y1,
        gamma_hat=np.zeros((0, m)),
        phi_hat=np.zeros((0, m, 0)),
        alpha=np.zeros(0),
        stages=stages,
        iterations=0 if diag is None else diag.iterations,
        converged=True if diag is None else diag.converged,
        solver_residual=0.0 if diag is None else diag.residual,
        y0=y0,
        h=h,
    )


def rk_step(
    t: ButcherTableau,
    problem: ProblemDefinition,
    y0: np.ndarray,
    h: float,
    settings: SolverSettings,
    *,
    jacobian: np.ndarray | None = None,
) -> StepResult:
    """One implicit Runge-Kutta step on the ``k m`` stage-derivative system ``K = f(y0 + h A K)``.

    Fixed-point iteration when ``settings.kind == "fixed_point"``, simplified
    Newton with ``I - h A (x) J0`` otherwise.
    """
    y0 = _state(problem, y0)
    _check_stepsize(h)
    if h == 0.0:
        return _plain_result(y0, y0.copy(), np.tile(y0, (t.stages, 1)), 0.0)

    def phi(K: np.ndarray) -> np.ndarray:
        return problem.rhs_many(y0 + h * (t.A @ K))

    K0 = np.tile(problem.rhs(y0), (t.stages, 1))
    if settings.kind == "fixed_point":
        K, diag = fixed_point_solve(phi, K0, settings)
    else:
        J0 = jacobian if jacobian is not None else evaluate_jacobian(problem, y0, settings.jacobian_policy)
        K, diag = newton_iterate(phi, K0, newton_matrix(h, t.A, J0), settings)
    return _plain_result(y0, y0 + h * (t.b @ K), y0 + h * (t.A @ K), h, diag)


def trapezoidal_step(
    t: ButcherTableau,
    problem: ProblemDefinition,
    y0: np.ndarray,
    h: float,
    settings: SolverSettings,
    *,
    jacobian: np.ndarray | None = None,
) -> StepResult:
    """One step of a rank-one (``A = c b^T``) rule, solved for ``y1`` alone.

    The stages are ``Y_i = y0 + c_i (y1 - y0)``, so the only unknown is
    ``y1 = y0 + h sum_i b_i f(Y_i)``.
    """
    if not t.mono_implicit:
        raise ConfigurationError(f"{t.name or 'tableau'} is not of the form A = c b^T")
    y0 = _state(problem, y0)
    _check_stepsize(h)
    if h == 0.0:
        return rk_step(t, problem, y0, 0.0, settings)

    def stages_of(Y1: np.ndarray) -> np.ndarray:
        return y0 + np.outer(t.c, Y1[0] - y0)

    def phi(Y1: np.ndarray) -> np.ndarray:
        return (y0 + h * (t.b @ problem.rhs_many(stages_of(Y1))))[np.newaxis, :]

    start = (y0 + h * problem.rhs(y0))[np.newaxis, :]
    if settings.kind == "fixed_point":
        Y1, diag = fixed_point_solve(phi, start, settings)
    else:
        J0 = jacobian if jacobian is not None else evaluate_jacobian(problem, y0, settings.jacobian_policy)
        weight = np.array([[t.b @ t.c]])
        Y1, diag = newton_iterate(phi, start, newton_matrix(h, weight, J0), settings)
    return _plain_result(y0, Y1[0].copy(), stages_of(Y1), h, diag)


def hbvm_step(
    cfg: HBVMConfig,
    problem: ProblemDefinition,
    y0: np.ndarray,
    h: float,
    settings: SolverSettings,
    *,
    jacobian: np.ndarray | None = None,
) -> StepResult:
    """One HBVM(k, s) step in the ``gamma`` formulation.

    Solves ``gamma = (P_s^T Omega (x) I) f(e (x) y0 + h (I_s (x) I) gamma)`` with
    the solver named by ``settings.kind`` and returns ``y1 = y0 + h gamma_0``.
    A non-converged solve is flagged with ``converged=False`` and carries the
    last iterate.
    """
    y0 = _state(problem, y0)
    _check_stepsize(h)
    if h == 0.0:
        return _trivial_step(y0, cfg.s, cfg.k)
    M = cfg.matrices
    G, diag = solve_coefficients(problem, y0, h, M, settings, jacobian=jacobian)
    return StepResult(
        y1=y0 + h * G[0],
        gamma_hat=G,
        phi_hat=np.zeros((cfg.s, problem.dim, 0)),
        alpha=np.zeros(0),
        stages=y0 + h * (M.I_s @ G),
        iterations=diag.iterations,
        converged=diag.converged,
        solver_residual=diag.residual,
        y0=y0,
        h=h,
    )


def solve_alpha(phi_hat: np.ndarray, gamma_hat: np.ndarray) -> np.ndarray:
    """Solve ``[phi_0^T phi_0] alpha = sum_j phi_j^T gamma_j``.

    Args:
        phi_hat: ``s x m x nu`` gradient coefficients.
        gamma_hat: ``s x m`` field coefficients.

    Raises:
        ConstraintDegeneracyError: If the smallest eigenvalue of
            ``phi_0^T phi_0`` is below ``1e-12`` times the largest.
    """
    phi = np.asarray(phi_hat, dtype=float)
    gamma = np.asarray(gamma_hat, dtype=float)
    if phi.ndim != 3 or phi.shape[:2] != gamma.shape:
        raise DimensionError(f"phi_hat {phi.shape} and gamma_hat {gamma.shape} do not match")
    nu = phi.shape[2]
    if nu == 0:
        return np.zeros(0)
    gram = phi[0].T @ phi[0]
    rhs = np.einsum("jmn,jm->n", phi, gamma)
    eig = np.linalg.eigvalsh(gram)
    if not eig[-1] > 0.0 or eig[0] < _DEGENERACY_RATIO * eig[-1]:
        raise ConstraintDegeneracyError(
            f"phi_0^T phi_0 is numerically singular (eigenvalues {eig[0]:.3e} .. {eig[-1]:.3e})"
        )
    return scipy.linalg.solve(gram, rhs, assume_a="pos")


def _check_regular(invariants: InvariantSet, y0: np.ndarray) -> None:
    grads = invariants.enforced_gradients(y0)
    if grads.shape[1] > grads.shape[0]:
        raise ConstraintDegeneracyError(
            f"cannot enforce {grads.shape[1]} invariants in dimension {grads.shape[0]}"
        )
    sv = np.linalg.svd(grads, compute_uv=False)
    if not sv[0] > 0.0 or sv[-1] <= _DEGENERACY_RATIO * sv[0]:
        raise ConstraintDegeneracyError("enforced invariant gradients lose rank at y0")


def lim_step(
    cfg: LIMConfig,
    problem: ProblemDefinition,
    invariants: InvariantSet,
    y0: np.ndarray,
    h: float,
    settings: SolverSettings,
    *,
    jacobian: np.ndarray | None = None,
) -> StepResult:
    """One LIM(r, k, s) step enforcing the masked invariants of *invariants*.

    The unknowns are the coefficients ``g_j`` of ``u'``; each sweep evaluates

    * the stages ``Y = y0 + h I_s g`` and ``gamma = P_s^T Omega f(Y)``,
    * the off-stage points ``Z_l = u(tau_l h)`` of the ``r``-point rule and
      ``phi_j = sum_l beta_l P_j(tau_l) grad L(Z_l)``,
    * ``alpha`` from :func:`solve_alpha`,

    and returns ``g = gamma - e_0 (x) phi_0 alpha``.  Newton-type solvers use
    the HBVM iteration matrix.  With ``r = 0`` (or no enforced invariant) the
    step is exactly :func:`hbvm_step`.

    Raises:
        ConstraintDegeneracyError: If the enforced gradients are rank deficient.
    """
    if cfg.r == 0 or invariants.enforced_count == 0:
        return hbvm_step(cfg.as_hbvm(), problem, y0, h, settings, jacobian=jacobian)
    y0 = _state(problem, y0)
    _check_stepsize(h)
    if h == 0.0:
        return _trivial_step(y0, cfg.s, cfg.k, invariants.enforced_count)
    _check_regular(invariants, y0)
    M = cfg.matrices
    beta = cfg.phi_rule.weights

    def sweep(G: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        Y = y0 + h * (M.I_s @ G)
        gamma = M.PtOmega @ problem.rhs_many(Y)
        Z = y0 + h * (cfg.phi_I @ G)
        grads = np.stack([invariants.enforced_gradients(z) for z in Z])
        phi = np.einsum("l,lj,lmn->jmn", beta, cfg.phi_P, grads)
        return Y, gamma, phi, solve_alpha(phi, gamma)

    def corrected(G: np.ndarray) -> np.ndarray:
        _, gamma, phi, alpha = sweep(G)
        out = gamma.copy()
        out[0] -= phi[0] @ alpha
        return out

    G, diag = solve_coefficients(
        problem,
        y0,
        h,
        M,
        settings,
        jacobian=jacobian,
        fixed_point_map=corrected,
        initial=initial_guess(problem, y0, cfg.s),
    )
    Y, gamma, phi, alpha = sweep(G)
    logger.debug("lim_step: h=%.6g alpha=%s", h, _summarize(alpha))
    return StepResult(
        y1=y0 + h * (gamma[0] - phi[0] @ alpha),
        gamma_hat=gamma,
        phi_hat=phi,
        alpha=alpha,
        stages=Y,
        iterations=diag.iterations,
        converged=diag.converged,
        solver_residual=diag.residual,
        y0=y0,
        h=h,
    )


def step(
    method: Method,
    problem: ProblemDefinition,
    y0: np.ndarray,
    h: float,
    settings: SolverSettings | None = None,
    *,
    invariants: InvariantSet | None = None,
    jacobian: np.ndarray | None = None,
) -> StepResult:
    """Advance one step with any supported method."""
    settings = settings or SolverSettings()
    if isinstance(method, LIMConfig):
        if invariants is None:
            if method.r > 0:
                raise ConfigurationError(f"{method.name} needs an invariant set")
            return hbvm_step(method.as_hbvm(), problem, y0, h, settings, jacobian=jacobian)
        return lim_step(method, problem, invariants, y0, h, settings, jacobian=jacobian)
    if isinstance(method, HBVMConfig):
        return hbvm_step(method, problem, y0, h, settings, jacobian=jacobian)
    if isinstance(method, ButcherTableau):
        if method.mono_implicit:
            return trapezoidal_step(method, problem, y0, h, settings, jacobian=jacobian)
        return rk_step(method, problem, y0, h, settings, jacobian=jacobian)
    raise ConfigurationError(f"unsupported method {method!r}")


def alpha_scaling_probe(
    cfg: LIMConfig,
    problem: ProblemDefinition,
    invariants: InvariantSet,
    y0: np.ndarray,
    h_list: np.ndarray | list[float],
    settings: SolverSettings | None = None,
) -> ConvergenceStudy:
    """Empirical order of ``|alpha|`` over a decreasing stepsize sequence.

    When every ``|alpha|`` sits below ``1e-15`` the study reports saturation
    (``floor_hit`` set, ``order`` *nan*) instead of a slope.

    Raises:
        ConfigurationError: If ``r == 0`` (``alpha`` is empty).
    """
    if cfg.r == 0:
        raise ConfigurationError("alpha_scaling_probe needs r > 0")
    settings = settings or SolverSettings(tol=1e-14)
    h = np.asarray(h_list, dtype=float)
    norms = np.array(
        [np.linalg.norm(lim_step(cfg, problem, invariants, y0, hi, settings).alpha) for hi in h]
    )
    study = loglog_order(h, norms, floor=ALPHA_FLOOR)
    if not study.fitted.any():
        logger.warning("alpha_scaling_probe: |alpha| saturated below %.0e for every h", ALPHA_FLOOR)
    return study
