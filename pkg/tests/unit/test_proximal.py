"""Unit tests for proximal operators."""

import numpy as np
import pytest
from scipy.optimize import minimize

from src.core.exceptions import InvalidInputError
from src.services.proximal import l1_ball_threshold, project_l1_ball, prox_step, soft_threshold


class TestSoftThreshold:
    """Test entrywise soft thresholding."""

    def test_should_shrink_toward_zero_when_threshold_positive(self):
        """Test shrinkage of a small vector."""
        # Act
        out = soft_threshold([3.0, -1.0, 0.5, -2.5], 1.0)

        # Assert
        np.testing.assert_allclose(out, [2.0, 0.0, 0.0, -1.5])

    def test_should_raise_error_when_threshold_negative(self):
        """Test negative threshold."""
        # Act & Assert
        with pytest.raises(InvalidInputError):
            soft_threshold([1.0], -0.1)


class TestL1BallProjection:
    """Test Euclidean projection onto the l1 ball."""

    @pytest.mark.parametrize(
        "x, expected",
        [
            ([2.0, 1.0], [1.0, 0.0]),
            ([3.0, 0.0], [1.0, 0.0]),
            ([-2.0, 1.0], [-1.0, 0.0]),
        ],
    )
    def test_should_match_known_projection_when_radius_is_one(self, x, expected):
        """Test small hand-computed cases."""
        # Act
        out = project_l1_ball(x, 1.0)

        # Assert
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_should_return_copy_when_point_is_inside_ball(self):
        """Test points already feasible."""
        # Arrange
        x = np.array([0.2, -0.3])

        # Act
        out = project_l1_ball(x, 1.0)

        # Assert
        np.testing.assert_array_equal(out, x)
        assert out is not x
        assert l1_ball_threshold(x, 1.0) == 0.0

    def test_should_return_zero_when_radius_is_zero(self):
        """Test r = 0."""
        # Act
        out = project_l1_ball(np.ones((2, 2)), 0.0)

        # Assert
        np.testing.assert_array_equal(out, np.zeros((2, 2)))

    def test_should_return_input_when_radius_is_infinite(self):
        """Test r = inf."""
        # Arrange
        x = np.array([[5.0, -7.0], [1.0, 0.0]])

        # Act
        out = project_l1_ball(x, np.inf)

        # Assert
        np.testing.assert_array_equal(out, x)

    def test_should_raise_error_when_radius_negative(self):
        """Test r < 0."""
        # Act & Assert
        with pytest.raises(InvalidInputError):
            project_l1_ball([1.0, 2.0], -1.0)

    def test_should_land_on_sphere_when_point_is_outside(self):
        """Test ||P(x)||_1 = r with sign preservation for a random matrix."""
        # Arrange
        rng = np.random.default_rng(0)
        x = rng.standard_normal((5, 5))

        # Act
        out = project_l1_ball(x, 1.5)

        # Assert
        assert np.sum(np.abs(out)) == pytest.approx(1.5, rel=1e-12)
        assert np.all(out * x >= 0)
        assert out.shape == x.shape

    def test_should_minimize_distance_when_compared_with_feasible_points(self):
        """Test optimality against random feasible candidates."""
        # Arrange
        rng = np.random.default_rng(1)
        x = rng.standard_normal(6) * 2
        out = project_l1_ball(x, 1.0)
        candidates = [project_l1_ball(rng.standard_normal(6), 1.0) for _ in range(200)]

        # Act
        best = np.linalg.norm(out - x)

        # Assert
        assert all(best <= np.linalg.norm(c - x) + 1e-12 for c in candidates)


class TestProxStep:
    """Test the joint penalty and ball prox."""

    def test_should_threshold_then_project_when_both_active(self):
        """Test soft threshold followed by projection."""
        # Act
        out = prox_step([3.0, 1.5, -0.2], 0.5, 1.0)

        # Assert
        np.testing.assert_allclose(out, project_l1_ball([2.5, 1.0, 0.0], 1.0))
        assert np.sum(np.abs(out)) == pytest.approx(1.0)

    def test_should_only_threshold_when_radius_is_infinite(self):
        """Test the unconstrained case."""
        # Act
        out = prox_step([3.0, -0.2], 0.5, np.inf)

        # Assert
        np.testing.assert_allclose(out, [2.5, 0.0])


def prox_objective(y: np.ndarray, x: np.ndarray, step_lambda: float) -> float:
    """0.5 ||y - x||^2 + step_lambda ||y||_1."""
    return float(0.5 * np.sum((y - x) ** 2) + step_lambda * np.sum(np.abs(y)))


def solve_prox_numerically(x: np.ndarray, step_lambda: float, r: float) -> np.ndarray:
    """Reference prox from SLSQP on the split y = u - v with u, v >= 0."""
    d = x.size

    def objective(z: np.ndarray) -> float:
        u, v = z[:d], z[d:]
        return float(0.5 * np.sum((u - v - x) ** 2) + step_lambda * np.sum(z))

    def jac(z: np.ndarray) -> np.ndarray:
        u, v = z[:d], z[d:]
        residual = u - v - x
        return np.concatenate([residual, -residual]) + step_lambda

    result = minimize(
        objective,
        np.zeros(2 * d),
        jac=jac,
        method="SLSQP",
        bounds=[(0.0, None)] * (2 * d),
        constraints=[
            {"type": "ineq", "fun": lambda z: r - np.sum(z), "jac": lambda z: -np.ones(2 * d)}
        ],
        options={"ftol": 1e-14, "maxiter": 500},
    )
    return result.x[:d] - result.x[d:]


class TestProxOracle:
    """Compare the closed-form operators with independent references."""

    @pytest.mark.parametrize("case", range(50))
    def test_should_match_numerical_oracle_when_dimension_is_small(self, case: int):
        """Test prox_step against a constrained solver and a feasible grid."""
        # Arrange
        rng = np.random.default_rng(100 + case)
        d = 1 + case % 3
        x = rng.uniform(-2.0, 2.0, size=d)
        step_lambda = float(rng.uniform(0.0, 0.8))
        r = float(rng.uniform(0.1, 1.5))
        axis = np.linspace(-r, r, 41)
        grid = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
        grid = grid[np.sum(np.abs(grid), axis=1) <= r]

        # Act
        out = prox_step(x, step_lambda, r)
        reference = solve_prox_numerically(x, step_lambda, r)

        # Assert
        assert np.sum(np.abs(out)) <= r + 1e-12
        np.testing.assert_allclose(out, reference, atol=1e-3)
        best = prox_objective(out, x, step_lambda)
        assert best <= prox_objective(reference, x, step_lambda) + 1e-9
        grid_values = 0.5 * np.sum((grid - x) ** 2, axis=1) + step_lambda * np.sum(
            np.abs(grid), axis=1
        )
        assert best <= grid_values.min() + 1e-12

    @pytest.mark.parametrize("seed", range(10))
    def test_should_satisfy_subgradient_condition_when_soft_thresholding(self, seed: int):
        """Test x - y lies in tau * d||y||_1 for y = soft_threshold(x, tau)."""
        # Arrange
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(12) * 2
        tau = float(rng.uniform(0.1, 1.5))

        # Act
        y = soft_threshold(x, tau)

        # Assert
        residual = x - y
        active = y != 0
        np.testing.assert_allclose(residual[active], tau * np.sign(y[active]), atol=1e-12)
        assert np.all(np.abs(residual[~active]) <= tau + 1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_should_satisfy_kkt_conditions_when_projecting_outside_point(self, seed: int):
        """Test x - P(x) = tau sign(P(x)) on the support and |x_i| <= tau off it."""
        # Arrange
        rng = np.random.default_rng(50 + seed)
        x = rng.standard_normal(15) * 3
        r = 2.0

        # Act
        y = project_l1_ball(x, r)
        tau = l1_ball_threshold(x, r)

        # Assert
        assert tau > 0
        active = y != 0
        np.testing.assert_allclose((x - y)[active], tau * np.sign(y[active]), atol=1e-12)
        assert np.all(np.abs(x[~active]) <= tau + 1e-12)
