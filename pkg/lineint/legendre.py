"""Shifted orthonormal Legendre polynomials on [0, 1] and Gauss-Legendre quadrature.

The polynomials satisfy ``int_0^1 P_i P_j = delta_ij`` and are generated by the
three-term recurrence

    P_0 = 1,  P_1 = sqrt(3) (2x - 1),
    P_{i+1} = (2x - 1) (2i+1)/(i+1) sqrt((2i+3)/(2i+1)) P_i
              - i/(i+1) sqrt((2i+3)/(2i-1)) P_{i-1}.

Their integrals follow from

    int_0^c P_0 = xi_1 P_1(c) + P_0(c) / 2,
    int_0^c P_i = xi_{i+1} P_{i+1}(c) - xi_i P_{i-1}(c),   xi_i = 1 / (2 sqrt(4i^2 - 1)).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.linalg

from lineint._logging import logger
from lineint.errors import ConfigurationError, NumericalError
from lineint.types.quadrature import QuadratureRule, SpectralMatrices

MAX_NODES = 32

_NEWTON_TOL = 2.3e-16
_NEWTON_MAX_ITER = 100
_ROOT_TOL = 1e-14


def xi(i: int) -> float:
    """``xi_i = 1 / (2 sqrt(4 i^2 - 1))`` for ``i >= 1``."""
    return 1.0 / (2.0 * np.sqrt(4.0 * i * i - 1.0))


def legendre_values(n: int, c: float | np.ndarray) -> np.ndarray:
    """Evaluate ``P_0, ..., P_{n-1}`` at the points *c*.

    Returns:
        Array of shape ``(len(c), n)``; row ``i`` holds ``P_j(c_i)``.
    """
    x = np.atleast_1d(np.asarray(c, dtype=float))
    out = np.zeros((x.shape[0], n))
    if n == 0:
        return out
    out[:, 0] = 1.0
    if n == 1:
        return out
    t = 2.0 * x - 1.0
    out[:, 1] = np.sqrt(3.0) * t
    for i in range(1, n - 1):
        a = (2 * i + 1) / (i + 1) * np.sqrt((2 * i + 3) / (2 * i + 1))
        b = i / (i + 1) * np.sqrt((2 * i + 3) / (2 * i - 1))
        out[:, i + 1] = a * t * out[:, i] - b * out[:, i - 1]
    return out


def legendre_integrals(n: int, c: float | np.ndarray) -> np.ndarray:
    """Evaluate ``int_0^c P_j`` for ``j = 0, ..., n-1`` at the points *c*.

    Returns:
        Array of shape ``(len(c), n)``.
    """
    values = legendre_values(n + 1, c)
    out = np.zeros((values.shape[0], n))
    if n == 0:
        return out
    out[:, 0] = xi(1) * values[:, 1] + 0.5 * values[:, 0]
    for j in range(1, n):
        out[:, j] = xi(j + 1) * values[:, j + 1] - xi(j) * values[:, j - 1]
    return out


def legendre_eval(j: int, c: float) -> float:
    """Value of the shifted orthonormal Legendre polynomial ``P_j`` at *c*."""
    if j < 0:
        raise ConfigurationError(f"polynomial degree must be >= 0, got {j}")
    return float(legendre_values(j + 1, c)[0, j])


def legendre_integral(j: int, c: float) -> float:
    """``int_0^c P_j(x) dx``."""
    if j < 0:
        raise ConfigurationError(f"polynomial degree must be >= 0, got {j}")
    return float(legendre_integrals(j + 1, c)[0, j])


def _standard_legendre(k: int, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return the standard (unshifted) ``L_k(y)`` and ``L_{k-1}(y)`` on [-1, 1]."""
    prev = np.ones_like(y)
    cur = y.copy()
    for i in range(1, k):
        prev, cur = cur, ((2 * i + 1) * y * cur - i * prev) / (i + 1)
    return cur, prev


def _root_residual(k: int, nodes: np.ndarray) -> float:
    y = 2.0 * nodes - 1.0
    lk, lk1 = _standard_legendre(k, y)
    dlk = k * (y * lk - lk1) / (y * y - 1.0)
    # shifted to [0, 1]: P_k'(c) = 2 sqrt(2k+1) L_k'(y), P_k(c) = sqrt(2k+1) L_k(y)
    return float(np.max(np.abs(lk / dlk))) / 2.0


@lru_cache(maxsize=None)
def gauss_rule(k: int) -> QuadratureRule:
    """Return the ``k``-point Gauss-Legendre rule on [0, 1].

    Nodes are the roots of ``P_k``, found by Newton's method on the standard
    Legendre polynomial from the Chebyshev-type initial guess
    ``cos((2i+1) pi / (2k)) + 0.27/k sin(...)``.  Weights integrate the
    polynomials ``P_0, ..., P_{k-1}`` exactly, which is the same as
    integrating the Lagrange cardinals.

    The root residual is the Newton correction ``|P_k(c) / P_k'(c)|`` at the
    final nodes, i.e. the distance of each node from the nearest root.

    Raises:
        ConfigurationError: If ``k`` is outside ``1..32``.
        NumericalError: If the root residual exceeds ``1e-14``.
    """
    if not 1 <= k <= MAX_NODES:
        raise ConfigurationError(f"gauss_rule supports 1 <= k <= {MAX_NODES}, got {k}")
    if k == 1:
        return QuadratureRule(k=1, nodes=np.array([0.5]), weights=np.array([1.0]))

    grid = np.linspace(-1.0, 1.0, k)
    y = np.cos((2 * np.arange(k) + 1) * np.pi / (2 * k)) + (0.27 / k) * np.sin(
        np.pi * grid * (k - 1) / (k + 1)
    )
    for _ in range(_NEWTON_MAX_ITER):
        lk, lk1 = _standard_legendre(k, y)
        dlk = k * (y * lk - lk1) / (y * y - 1.0)
        step = lk / dlk
        y = y - step
        if np.max(np.abs(step)) <= _NEWTON_TOL:
            break

    nodes = np.sort((1.0 + y) / 2.0)
    nodes = 0.5 * (nodes + (1.0 - nodes[::-1]))

    P = legendre_values(k, nodes)
    rhs = np.zeros(k)
    rhs[0] = 1.0
    weights = np.linalg.solve(P.T, rhs)
    weights = 0.5 * (weights + weights[::-1])

    residual = _root_residual(k, nodes)
    logger.debug("gauss_rule(%d): root residual %.3e", k, residual)
    if not residual <= _ROOT_TOL:
        raise NumericalError(f"gauss_rule({k}): root residual {residual:.3e} exceeds {_ROOT_TOL:g}")
    return QuadratureRule(k=k, nodes=nodes, weights=weights)


def xhat_matrix(s: int) -> np.ndarray:
    """The ``(s+1) x s`` matrix with ``int_0^c [P_0..P_{s-1}] = [P_0..P_s] Xhat_s``."""
    X = np.zeros((s + 1, s))
    X[0, 0] = 0.5
    for j in range(s):
        X[j + 1, j] = xi(j + 1)
        if j >= 1:
            X[j - 1, j] = -xi(j)
    return X


@lru_cache(maxsize=None)
def build_matrices(k: int, s: int) -> SpectralMatrices:
    """Assemble ``P_s``, ``P_{s+1}``, ``I_s``, ``Omega`` and ``Xhat_s`` on the ``k`` Gauss nodes.

    Raises:
        ConfigurationError: Unless ``k >= s >= 1`` and ``k <= 32``.
    """
    if not k >= s >= 1:
        raise ConfigurationError(f"build_matrices needs k >= s >= 1, got k={k}, s={s}")
    rule = gauss_rule(k)
    values = legendre_values(s + 1, rule.nodes)
    return SpectralMatrices(
        k=k,
        s=s,
        rule=rule,
        P_s=values[:, :s],
        P_s1=values,
        I_s=legendre_integrals(s, rule.nodes),
        Omega=np.diag(rule.weights),
        Xhat_s=xhat_matrix(s),
    )


def x_eigenvalues(s: int) -> np.ndarray:
    """Spectrum of ``X_s`` from the dense unsymmetric eigensolver."""
    return scipy.linalg.eigvals(xhat_matrix(s)[:s, :])
