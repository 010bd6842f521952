from __future__ import annotations

import numpy as np
import pytest

import lineint.legendre as legendre_module
from lineint.errors import ConfigurationError, NumericalError
from lineint.legendre import (
    MAX_NODES,
    build_matrices,
    gauss_rule,
    legendre_eval,
    legendre_integral,
    legendre_integrals,
    legendre_values,
    x_eigenvalues,
    xhat_matrix,
    xi,
)
from lineint.methods import hbvm_tableau


def test_first_polynomials_closed_form() -> None:
    c = np.linspace(0.0, 1.0, 11)
    P = legendre_values(3, c)
    np.testing.assert_allclose(P[:, 0], 1.0)
    np.testing.assert_allclose(P[:, 1], np.sqrt(3.0) * (2 * c - 1), atol=1e-15)
    np.testing.assert_allclose(P[:, 2], np.sqrt(5.0) * (6 * c**2 - 6 * c + 1), atol=1e-14)


def test_integrals_closed_form() -> None:
    c = np.linspace(0.0, 1.0, 7)
    I = legendre_integrals(2, c)
    np.testing.assert_allclose(I[:, 0], c, atol=1e-15)
    np.testing.assert_allclose(I[:, 1], np.sqrt(3.0) * (c**2 - c), atol=1e-15)


@pytest.mark.parametrize("j", range(8))
def test_integral_endpoints(j: int) -> None:
    assert legendre_integral(j, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert legendre_integral(j, 1.0) == pytest.approx(1.0 if j == 0 else 0.0, abs=1e-14)


def test_scalar_helpers_reject_negative_degree() -> None:
    with pytest.raises(ConfigurationError):
        legendre_eval(-1, 0.3)
    with pytest.raises(ConfigurationError):
        legendre_integral(-1, 0.3)


def test_xi_values() -> None:
    assert xi(1) == pytest.approx(1.0 / (2.0 * np.sqrt(3.0)))
    assert xi(2) == pytest.approx(1.0 / (2.0 * np.sqrt(15.0)))


def test_one_and_two_point_rules() -> None:
    one = gauss_rule(1)
    np.testing.assert_array_equal(one.nodes, [0.5])
    np.testing.assert_array_equal(one.weights, [1.0])
    two = gauss_rule(2)
    np.testing.assert_allclose(two.nodes, [0.5 - np.sqrt(3) / 6, 0.5 + np.sqrt(3) / 6], atol=1e-15)
    np.testing.assert_allclose(two.weights, [0.5, 0.5], atol=1e-15)


@pytest.mark.parametrize("k", [1, 2, 3, 5, 8, 12, 20])
def test_rule_is_exact_to_degree_2k_minus_1(k: int) -> None:
    rule = gauss_rule(k)
    for degree in range(2 * k):
        assert rule.integrate(rule.nodes**degree) == pytest.approx(1.0 / (degree + 1), abs=1e-14)
    assert rule.order == 2 * k


@pytest.mark.parametrize("k", [2, 3, 6, 9, 16, MAX_NODES])
def test_rule_is_symmetric_and_positive(k: int) -> None:
    rule = gauss_rule(k)
    np.testing.assert_allclose(rule.nodes + rule.nodes[::-1], 1.0, atol=1e-15)
    np.testing.assert_allclose(rule.weights, rule.weights[::-1], atol=1e-15)
    assert np.all(rule.weights > 0)
    assert np.all(np.diff(rule.nodes) > 0)
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(legendre_values(k + 1, rule.nodes)[:, k], 0.0, atol=1e-10)


@pytest.mark.parametrize("k", [0, MAX_NODES + 1])
def test_rule_size_out_of_range(k: int) -> None:
    with pytest.raises(ConfigurationError):
        gauss_rule(k)


def test_rule_root_residual_is_enforced(monkeypatch: pytest.MonkeyPatch) -> None:
    gauss_rule.cache_clear()
    monkeypatch.setattr(legendre_module, "_NEWTON_MAX_ITER", 0)
    try:
        with pytest.raises(NumericalError, match="root residual"):
            gauss_rule(7)
    finally:
        gauss_rule.cache_clear()


@pytest.mark.parametrize("k", [2, 9, MAX_NODES])
def test_rule_nodes_are_roots(k: int) -> None:
    c = gauss_rule(k).nodes
    assert legendre_module._root_residual(k, c) <= 1e-14


def test_rule_arrays_are_read_only() -> None:
    with pytest.raises(ValueError):
        gauss_rule(3).nodes[0] = 0.0


@pytest.mark.parametrize("n", [4, 10])
def test_orthonormality_under_quadrature(n: int) -> None:
    rule = gauss_rule(n + 2)
    P = legendre_values(n, rule.nodes)
    np.testing.assert_allclose(P.T @ (rule.weights[:, None] * P), np.eye(n), atol=1e-13)


@pytest.mark.parametrize("k", range(1, 9))
def test_matrix_identities(k: int) -> None:
    for s in range(1, k + 1):
        M = build_matrices(k, s)
        expected = np.hstack([np.eye(s), np.zeros((s, 1))])
        assert np.max(np.abs(M.P_s.T @ M.Omega @ M.P_s1 - expected)) <= 1e-13
        assert np.max(np.abs(M.I_s - M.P_s1 @ M.Xhat_s)) <= 1e-13
        np.testing.assert_allclose(M.PtOmega, M.P_s.T @ M.Omega, atol=1e-15)


def test_build_matrices_needs_k_at_least_s() -> None:
    with pytest.raises(ConfigurationError):
        build_matrices(1, 2)
    with pytest.raises(ConfigurationError):
        build_matrices(3, 0)


def test_xhat_structure() -> None:
    X = xhat_matrix(3)
    assert X.shape == (4, 3)
    assert X[0, 0] == 0.5
    assert X[1, 0] == pytest.approx(xi(1))
    assert X[0, 1] == pytest.approx(-xi(1))
    assert X[2, 1] == pytest.approx(xi(2))
    assert X[1, 2] == pytest.approx(-xi(2))
    assert X[3, 2] == pytest.approx(xi(3))
    assert X[2, 0] == 0.0


def test_x_eigenvalues() -> None:
    np.testing.assert_allclose(x_eigenvalues(1), [0.5])
    mu = x_eigenvalues(2)
    # X_2 = [[1/2, -xi_1], [xi_1, 0]]: trace 1/2, determinant 1/12
    assert mu.sum() == pytest.approx(0.5)
    assert np.prod(mu) == pytest.approx(1.0 / 12.0)


@pytest.mark.parametrize("s", [1, 2, 3, 4])
def test_w_transform_is_collocation_matrix(s: int) -> None:
    M = build_matrices(s, s)
    np.testing.assert_allclose(M.W_transform(), hbvm_tableau(s, s).A, atol=1e-13)
    np.testing.assert_array_equal(M.I1, np.eye(s)[0])


def test_w_transform_needs_square_case() -> None:
    with pytest.raises(ConfigurationError):
        build_matrices(4, 2).W_transform()


@pytest.mark.parametrize("s", range(1, 9))
def test_smallest_eigenvalue_has_largest_argument(s: int) -> None:
    mu = x_eigenvalues(s)
    assert np.all(mu.real > 0.0)
    smallest = mu[np.argmin(np.abs(mu))]
    assert abs(np.angle(smallest)) >= np.max(np.abs(np.angle(mu))) - 1e-12


# ----------------------------------------------------------------------
# Moments and filtered integrals
# ----------------------------------------------------------------------


def _shifted_power_coefficients(j: int) -> np.ndarray:
    """Monomial coefficients of ``P_j`` on [0, 1], lowest degree first."""
    series = np.polynomial.Legendre.basis(j, domain=[0.0, 1.0]).convert(
        kind=np.polynomial.Polynomial, domain=[-1.0, 1.0], window=[-1.0, 1.0]
    )
    return np.sqrt(2.0 * j + 1.0) * series.coef


def _exact_filtered_exp(j: int, h: float, terms: int = 40) -> float:
    """``int_0^1 P_j(t) exp(h t) dt`` summed from the Taylor series of the exponential."""
    a = _shifted_power_coefficients(j)
    total = 0.0
    term = 1.0
    for n in range(terms):
        moment = sum(a[l] / (l + n + 1) for l in range(len(a)))
        total += term * moment
        term *= h / (n + 1)
    return total


@pytest.mark.parametrize("j", range(1, 9))
def test_moments_below_degree_vanish(j: int) -> None:
    rule = gauss_rule(9)
    P = legendre_values(j + 1, rule.nodes)[:, j]
    for k in range(j):
        assert rule.weights @ (P * rule.nodes**k) == pytest.approx(0.0, abs=1e-13)
    assert rule.weights @ (P * rule.nodes**j) != pytest.approx(0.0, abs=1e-6)


def test_power_coefficients_match_basis() -> None:
    c = np.linspace(0.0, 1.0, 9)
    for j in range(5):
        values = np.polynomial.polynomial.polyval(c, _shifted_power_coefficients(j))
        np.testing.assert_allclose(values, legendre_values(j + 1, c)[:, j], atol=1e-12)


def _slope(h: np.ndarray, values: np.ndarray) -> float:
    return float(np.polyfit(np.log(h), np.log(values), 1)[0])


@pytest.mark.parametrize("j", [0, 1, 2])
def test_quadrature_error_of_filtered_integral(j: int) -> None:
    # a 3-point rule is exact to degree 5, so the error is O(h^(6 - j))
    k = 3
    rule = gauss_rule(k)
    P = legendre_values(j + 1, rule.nodes)[:, j]
    h = np.array([1.0, 0.5, 0.25])
    errors = np.array(
        [abs(rule.weights @ (P * np.exp(hh * rule.nodes)) - _exact_filtered_exp(j, hh)) for hh in h]
    )
    assert _slope(h, errors) >= 2 * k - j - 0.5


@pytest.mark.parametrize("j", [0, 1, 2, 3])
def test_filtered_integral_scales_with_degree(j: int) -> None:
    h = np.array([0.1, 0.05, 0.025])
    values = np.array([abs(_exact_filtered_exp(j, hh)) for hh in h])
    assert _slope(h, values) >= j - 0.5
