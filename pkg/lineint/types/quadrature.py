from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from lineint.errors import ConfigurationError


def _frozen(values: np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule on [0, 1] with ``k`` nodes, exact up to degree ``2k - 1``."""

    k: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", _frozen(self.nodes))
        object.__setattr__(self, "weights", _frozen(self.weights))

    @property
    def order(self) -> int:
        return 2 * self.k

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Apply the rule to samples taken at :attr:`nodes` (leading axis)."""
        return np.tensordot(self.weights, np.asarray(values, dtype=float), axes=(0, 0))


@dataclass(frozen=True)
class SpectralMatrices:
    """The matrices defining HBVM(k, s) on the ``k`` Gauss-Legendre nodes.

    Attributes:
        k: Number of quadrature nodes.
        s: Polynomial degree (number of Legendre coefficients).
        rule: The underlying :class:`QuadratureRule`.
        P_s: ``k x s`` matrix ``P_j(c_i)``.
        P_s1: ``k x (s+1)`` matrix ``P_j(c_i)``, one column more than ``P_s``.
        I_s: ``k x s`` matrix of ``int_0^{c_i} P_j``.
        Omega: ``k x k`` diagonal matrix of the weights.
        Xhat_s: ``(s+1) x s`` matrix with ``I_s = P_s1 @ Xhat_s``.
        X_s: leading ``s x s`` block of ``Xhat_s``.
    """

    k: int
    s: int
    rule: QuadratureRule
    P_s: np.ndarray
    P_s1: np.ndarray
    I_s: np.ndarray
    Omega: np.ndarray
    Xhat_s: np.ndarray

    def __post_init__(self) -> None:
        for name in ("P_s", "P_s1", "I_s", "Omega", "Xhat_s"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def X_s(self) -> np.ndarray:
        return self.Xhat_s[: self.s, :]

    @property
    def PtOmega(self) -> np.ndarray:
        """``P_s^T Omega`` (``s x k``), the map from stage samples to coefficients."""
        return self.P_s.T * self.rule.weights

    @property
    def I1(self) -> np.ndarray:
        """Row vector of ``int_0^1 P_j``, i.e. the first unit vector of length ``s``."""
        row = np.zeros(self.s)
        row[0] = 1.0
        return row

    def W_transform(self) -> np.ndarray:
        """``P_s X_s P_s^{-1}``; the Gauss collocation matrix when ``k == s``."""
        if self.k != self.s:
            raise ConfigurationError(f"W-transform needs k == s, got k={self.k}, s={self.s}")
        return self.P_s @ self.X_s @ np.linalg.inv(self.P_s)
