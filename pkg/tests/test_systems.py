from __future__ import annotations

import numpy as np
import pytest

from lineint import systems
from lineint.errors import ConfigurationError, DimensionError, DomainError, ParameterError
from lineint.systems import InvariantSet, check_invariant_orthogonality


def _numeric_gradient(fun, y: np.ndarray, step: float = 1e-6) -> np.ndarray:
    cols = []
    for i in range(y.shape[0]):
        e = np.zeros_like(y)
        e[i] = step
        cols.append((np.asarray(fun(y + e)) - np.asarray(fun(y - e))) / (2 * step))
    return np.array(cols)


N_POINTS = 50


def _kepler_points() -> np.ndarray:
    rng = np.random.default_rng(7)
    angles = rng.uniform(0.0, 2 * np.pi, N_POINTS)
    radii = rng.uniform(0.3, 2.0, N_POINTS)
    momenta = rng.normal(size=(N_POINTS, 2))
    return np.column_stack([radii * np.cos(angles), radii * np.sin(angles), momenta])


def _lotka_points() -> np.ndarray:
    return np.random.default_rng(11).uniform(0.2, 3.0, size=(N_POINTS, 3))


# ----------------------------------------------------------------------
# Kepler
# ----------------------------------------------------------------------


def test_kepler_initial_invariants(kepler06) -> None:
    problem, invariants, y0, period = kepler06
    H, L, F = invariants.values(y0)
    assert H == pytest.approx(-0.5, abs=1e-15)
    assert L == pytest.approx(np.sqrt(1 - 0.6**2), abs=1e-15)
    assert F == 0.0
    assert period == pytest.approx(2 * np.pi)
    assert invariants.names == ("H", "L", "F")
    assert problem.dim == 4


@pytest.mark.parametrize("eps", [-0.1, 1.0, 1.5])
def test_kepler_rejects_eccentricity(eps: float) -> None:
    with pytest.raises(DomainError):
        systems.kepler(eps)


def test_kepler_collision_is_a_domain_error(kepler06) -> None:
    problem = kepler06.problem
    with pytest.raises(DomainError):
        problem.rhs(np.array([0.0, 0.0, 1.0, 0.0]))
    assert DomainError("x").retryable


def test_kepler_invariants_are_first_integrals(kepler06) -> None:
    problem, invariants, _, _ = kepler06
    for y in _kepler_points():
        assert np.max(np.abs(check_invariant_orthogonality(problem, invariants, y))) <= 1e-12


def test_kepler_gradients_and_jacobian(kepler06) -> None:
    problem, invariants, _, _ = kepler06
    for y in _kepler_points():
        np.testing.assert_allclose(invariants.gradients(y), _numeric_gradient(invariants.values, y), atol=1e-6)
        np.testing.assert_allclose(problem.jacobian(y), _numeric_gradient(problem.rhs, y).T, atol=1e-6)
        np.testing.assert_allclose(problem.gradH(y), _numeric_gradient(problem.H, y), atol=1e-6)


def test_kepler_invariants_along_reference_orbit(kepler06, reference_flow) -> None:
    problem, invariants, y0, period = kepler06
    ts = np.linspace(0.0, period, 9)
    states = reference_flow(problem, y0, ts)
    drift = np.array([invariants.values(y) for y in states]) - invariants.values(y0)
    assert np.max(np.abs(drift)) <= 1e-9
    np.testing.assert_allclose(states[-1], y0, atol=1e-8)


# ----------------------------------------------------------------------
# Lotka-Volterra
# ----------------------------------------------------------------------


def test_lotka_volterra_parameter_constraint() -> None:
    with pytest.raises(ParameterError):
        systems.lotka_volterra(a=-2.0, b=-1.0, c=-1.0)
    assert not ParameterError("x").retryable


def test_lotka_volterra_period_only_for_defaults() -> None:
    assert systems.lotka_volterra().period == systems.LOTKA_VOLTERRA_PERIOD
    assert np.isnan(systems.lotka_volterra(a=-1.0, b=-1.0, c=-1.0).period)


def test_lotka_volterra_domain(lotka) -> None:
    with pytest.raises(DomainError):
        lotka.problem.rhs(np.array([1.0, -0.5, 0.5]))


def test_lotka_volterra_structure(lotka) -> None:
    problem, invariants, _, _ = lotka
    for y in _lotka_points():
        B = problem.B(y)
        np.testing.assert_allclose(B, -B.T, atol=0.0)
        grad_casimir = invariants.gradients(y)[:, 1]
        assert np.max(np.abs(grad_casimir @ B)) <= 1e-12
        assert np.max(np.abs(check_invariant_orthogonality(problem, invariants, y))) <= 1e-12
        np.testing.assert_allclose(problem.jacobian(y), _numeric_gradient(problem.rhs, y).T, atol=1e-6)
        np.testing.assert_allclose(invariants.gradients(y), _numeric_gradient(invariants.values, y), atol=1e-6)


def test_lotka_volterra_period(lotka, reference_flow) -> None:
    problem, invariants, y0, period = lotka
    ts = np.linspace(0.0, period, 7)
    states = reference_flow(problem, y0, ts)
    np.testing.assert_allclose(states[-1], y0, atol=1e-8)
    drift = np.array([invariants.values(y) for y in states]) - invariants.values(y0)
    assert np.max(np.abs(drift)) <= 1e-9


# ----------------------------------------------------------------------
# Polynomial Hamiltonian
# ----------------------------------------------------------------------


def test_poly_hamiltonian_definition() -> None:
    problem, invariants = systems.poly_hamiltonian(1.0, 10.0, 4)
    assert problem.polynomial_degree == 8
    assert problem.half_dim == 1
    y = np.array([0.3, -0.1])
    assert invariants.values(y)[0] == pytest.approx(0.01 + 9.0 + 0.2**8)
    np.testing.assert_allclose(problem.gradH(y), _numeric_gradient(problem.H, y), atol=1e-6)
    np.testing.assert_allclose(problem.jacobian(y), _numeric_gradient(problem.rhs, y).T, atol=1e-6)
    assert check_invariant_orthogonality(problem, invariants, y)[0] == pytest.approx(0.0, abs=1e-12)


def test_poly_hamiltonian_gradients_at_random_states() -> None:
    problem, invariants = systems.poly_hamiltonian(1.0, 10.0, 4)
    for y in np.random.default_rng(13).uniform(-1.0, 1.0, size=(N_POINTS, 2)):
        np.testing.assert_allclose(problem.gradH(y), _numeric_gradient(problem.H, y), rtol=1e-7, atol=1e-6)
        np.testing.assert_allclose(
            problem.jacobian(y), _numeric_gradient(problem.rhs, y).T, rtol=1e-7, atol=1e-6
        )
        np.testing.assert_allclose(
            invariants.gradients(y), _numeric_gradient(invariants.values, y), rtol=1e-7, atol=1e-6
        )


def test_poly_hamiltonian_rejects_degree() -> None:
    with pytest.raises(ConfigurationError):
        systems.poly_hamiltonian(1.0, 10.0, 0)


def test_poly_initial_points() -> None:
    np.testing.assert_array_equal(systems.poly_initial_points(3), [[1, -1], [2, -2], [3, -3]])


# ----------------------------------------------------------------------
# Problem and invariant plumbing
# ----------------------------------------------------------------------


def test_generic_problem_and_reversal() -> None:
    problem = systems.generic(lambda y: np.array([y[1], -y[0]]), 2)
    assert not problem.has_jacobian
    y = np.array([0.2, 0.7])
    np.testing.assert_array_equal(problem.reversed().rhs(y), -problem.rhs(y))
    assert problem.reversed().jacobian is None


def test_reversal_negates_jacobian(kepler06) -> None:
    problem, _, y0, _ = kepler06
    np.testing.assert_array_equal(problem.reversed().jacobian(y0), -problem.jacobian(y0))


def test_rhs_shape_is_checked() -> None:
    problem = systems.generic(lambda y: np.zeros(3), 2)
    with pytest.raises(DimensionError):
        problem.rhs(np.zeros(2))
    with pytest.raises(DimensionError):
        systems.generic(lambda y: y, 0)


def test_invariant_mask_and_selection(kepler06) -> None:
    invariants = kepler06.invariants
    assert invariants.enforced_count == 3
    only_h = invariants.select(["H"])
    np.testing.assert_array_equal(only_h.enforce_mask, [True, False, False])
    assert only_h.enforced_gradients(kepler06.y0).shape == (4, 1)
    assert only_h.values(kepler06.y0).shape == (3,)
    with pytest.raises(ConfigurationError):
        invariants.select(["energy"])
    with pytest.raises(DimensionError):
        invariants.with_mask([True, False])


def test_invariant_shapes_are_checked() -> None:
    bad = InvariantSet(nu=2, L=lambda y: np.zeros(3), gradL=lambda y: np.zeros((2, 1)))
    with pytest.raises(DimensionError):
        bad.values(np.zeros(2))
    with pytest.raises(DimensionError):
        bad.gradients(np.zeros(2))
    assert bad.names == ("L0", "L1")
