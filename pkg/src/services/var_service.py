"""VAR(1) process service: transition generators, simulation and population moments."""

import logging
from typing import Optional, Union

import numpy as np
from scipy.linalg import solve_discrete_lyapunov

from ..core.exceptions import InvalidInputError, NumericalFailure, UnstableTransitionError
from ..core.linalg import as_square, readonly
from ..core.seeding import Stream, derive_rng
from ..models.var import (
    InnovationFamily,
    InnovationSpec,
    Pattern,
    Trajectory,
    TransitionMatrix,
)


logger = logging.getLogger(__name__)

MatrixLike = Union[TransitionMatrix, np.ndarray]

# Patterns with all eigenvalues zero; target_rho becomes the entry magnitude.
NILPOTENT_PATTERNS = (Pattern.IN_STAR, Pattern.OUT_STAR, Pattern.CHAIN)

RHO_TOLERANCE = 1e-8
MAX_SUPPORT_DRAWS = 200
LYAPUNOV_RESIDUAL_TOL = 1e-10


def entries_of(B: MatrixLike, name: str = "B") -> np.ndarray:
    """Dense entries of a transition matrix or array."""
    if isinstance(B, TransitionMatrix):
        return np.asarray(B.entries)
    return as_square(B, name)


class VarProcessService:
    """Service for generating and simulating stable VAR(1) processes."""

    def __init__(self):
        """Initialize VAR process service."""
        self.logger = logging.getLogger(self.__class__.__name__)

    def implied_k(self, pattern: Pattern, p: int) -> Optional[int]:
        """Nonzero count forced by a structured pattern (None for random_sparse)."""
        if pattern == Pattern.DIAGONAL:
            return p
        if pattern in NILPOTENT_PATTERNS:
            return p - 1
        return None

    def generate_sparse_transition(
        self,
        pattern: Pattern,
        p: int,
        k: int,
        target_rho: float,
        seed: int,
    ) -> TransitionMatrix:
        """Generate a sparse stable transition matrix.

        Args:
            pattern: Support pattern
            p: Dimension
            k: Number of nonzero entries
            target_rho: Spectral radius in (0, 1); entry magnitude for nilpotent patterns
            seed: Seed of the transition stream

        Returns:
            Transition matrix with the requested support

        Raises:
            InvalidInputError: If (pattern, p, k, target_rho) is infeasible
        """
        pattern = Pattern(pattern)
        if p < 1:
            raise InvalidInputError(f"p must be >= 1, got {p}")
        if not 0.0 < target_rho < 1.0:
            raise InvalidInputError(f"target_rho must lie in (0, 1), got {target_rho}")
        if not 1 <= k <= p * p:
            raise InvalidInputError(f"k must satisfy 1 <= k <= p^2 = {p * p}, got {k}")
        if pattern == Pattern.CUSTOM:
            raise InvalidInputError("custom matrices are loaded, not generated")

        expected = self.implied_k(pattern, p)
        if expected is not None and k != expected:
            raise InvalidInputError(
                f"pattern {pattern.value} with p={p} implies k={expected}, got {k}"
            )

        B = np.zeros((p, p))
        idx = np.arange(1, p)
        if pattern == Pattern.DIAGONAL:
            B = target_rho * np.eye(p)
        elif pattern == Pattern.IN_STAR:
            B[idx, 0] = target_rho
        elif pattern == Pattern.OUT_STAR:
            B[0, idx] = target_rho
        elif pattern == Pattern.CHAIN:
            B[idx, idx - 1] = target_rho
        else:
            B = self._random_sparse(p, k, target_rho, seed)

        matrix = TransitionMatrix(
            entries=B,
            pattern=pattern,
            seed=seed,
            target_rho=target_rho,
            rho_is_entry_magnitude=pattern in NILPOTENT_PATTERNS,
        )
        self.logger.debug(f"Generated {pattern.value} transition p={p} k={matrix.k}")
        return matrix

    def _random_sparse(self, p: int, k: int, target_rho: float, seed: int) -> np.ndarray:
        rng = derive_rng(seed, Stream.TRANSITION)
        for _ in range(MAX_SUPPORT_DRAWS):
            positions = rng.choice(p * p, size=k, replace=False)
            values = rng.uniform(0.5, 1.0, size=k) * rng.choice([-1.0, 1.0], size=k)
            B = np.zeros(p * p)
            B[positions] = values
            B = B.reshape(p, p)
            rho = self.spectral_radius(B)
            if rho > RHO_TOLERANCE:
                B = B * (target_rho / rho)
                measured = self.spectral_radius(B)
                if abs(measured - target_rho) > RHO_TOLERANCE:
                    raise NumericalFailure(
                        f"rescaled spectral radius {measured} misses target {target_rho}"
                    )
                return B
        raise InvalidInputError(
            f"random_sparse support with p={p}, k={k} stayed nilpotent after "
            f"{MAX_SUPPORT_DRAWS} draws"
        )

    def spectral_radius(self, B: MatrixLike) -> float:
        """Largest eigenvalue modulus."""
        arr = entries_of(B)
        if arr.size == 0:
            return 0.0
        return float(np.max(np.abs(np.linalg.eigvals(arr))))

    def require_stable(self, B: MatrixLike) -> np.ndarray:
        """Return the entries of ``B`` or raise if rho(B) >= 1."""
        arr = entries_of(B)
        rho = self.spectral_radius(arr)
        if rho >= 1.0:
            raise UnstableTransitionError(f"transition matrix is unstable: rho(B) = {rho:.6g} >= 1")
        return arr

    def stationary_covariance(self, B: MatrixLike, covariance: np.ndarray) -> np.ndarray:
        """Solve Gamma = B Gamma B' + Sigma for the stationary covariance.

        Args:
            B: Stable transition matrix
            covariance: Positive-definite innovation covariance

        Returns:
            Symmetric positive-definite Gamma_w(0)

        Raises:
            UnstableTransitionError: If rho(B) >= 1
            NumericalFailure: If the fixed-point residual stays above tolerance
        """
        arr = self.require_stable(B)
        sigma = as_square(covariance, "covariance")
        if sigma.shape != arr.shape:
            raise InvalidInputError(f"covariance shape {sigma.shape} does not match B {arr.shape}")

        gamma = solve_discrete_lyapunov(arr, sigma)
        gamma = 0.5 * (gamma + gamma.T)
        # Iterative refinement on the residual
        for _ in range(3):
            residual = sigma + arr @ gamma @ arr.T - gamma
            scale = max(float(np.max(np.abs(gamma))), np.finfo(float).tiny)
            if float(np.max(np.abs(residual))) <= LYAPUNOV_RESIDUAL_TOL * scale:
                return readonly(gamma)
            correction = solve_discrete_lyapunov(arr, residual)
            gamma = gamma + 0.5 * (correction + correction.T)

        residual = sigma + arr @ gamma @ arr.T - gamma
        scale = max(float(np.max(np.abs(gamma))), np.finfo(float).tiny)
        if float(np.max(np.abs(residual))) > LYAPUNOV_RESIDUAL_TOL * scale:
            raise NumericalFailure(
                f"Lyapunov residual {np.max(np.abs(residual)):.3g} above tolerance"
            )
        return readonly(gamma)

    def autocovariance(self, B: MatrixLike, covariance: np.ndarray, h: int) -> np.ndarray:
        """Gamma_w(h) = Gamma_w(0) (B')^h."""
        if h < 0:
            raise InvalidInputError(f"lag h must be >= 0, got {h}")
        arr = self.require_stable(B)
        gamma0 = self.stationary_covariance(arr, covariance)
        return readonly(gamma0 @ np.linalg.matrix_power(arr.T, h))

    def draw_innovations(self, spec: InnovationSpec, n: int, seed: int) -> np.ndarray:
        """Draw a p x n block of i.i.d. innovations with covariance ``spec.covariance``.

        Every family is a linear image L z of a unit-variance vector z with
        independent coordinates, L the Cholesky factor of the covariance.
        """
        if n < 0:
            raise InvalidInputError(f"n must be >= 0, got {n}")
        rng = derive_rng(seed, Stream.INNOVATIONS)
        shape = (spec.p, n)
        if spec.family == InnovationFamily.GAUSSIAN:
            z = rng.standard_normal(shape)
        elif spec.family == InnovationFamily.BOUNDED_UNIFORM:
            z = rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), size=shape)
        else:
            z = rng.choice([-1.0, 1.0], size=shape)
        return spec.cholesky @ z

    def simulate(
        self,
        B: MatrixLike,
        spec: InnovationSpec,
        n: int,
        seed: int,
        burn_in: int = 0,
    ) -> Trajectory:
        """Simulate w_{t+1} = B w_t + eps_t from w_0 = 0.

        Args:
            B: Stable transition matrix
            spec: Innovation distribution
            n: Horizon (number of transitions recorded)
            seed: Seed of the innovation stream
            burn_in: Discarded transitions before column 0 (0 keeps w_0 = 0)

        Returns:
            Trajectory with the innovations that produced it

        Raises:
            UnstableTransitionError: If rho(B) >= 1
            InvalidInputError: If n < 1 or dimensions disagree
        """
        arr = self.require_stable(B)
        if n < 1:
            raise InvalidInputError(f"n must be >= 1, got {n}")
        if burn_in < 0:
            raise InvalidInputError(f"burn_in must be >= 0, got {burn_in}")
        if spec.p != arr.shape[0]:
            raise InvalidInputError(f"innovation dimension {spec.p} != p = {arr.shape[0]}")

        eps = self.draw_innovations(spec, burn_in + n, seed)
        p = arr.shape[0]
        state = np.zeros(p)
        for t in range(burn_in):
            state = arr @ state + eps[:, t]

        kept = eps[:, burn_in:]
        W = np.empty((p, n + 1))
        W[:, 0] = state
        for t in range(n):
            W[:, t + 1] = arr @ W[:, t] + kept[:, t]

        self.logger.debug(f"Simulated trajectory p={p} n={n} burn_in={burn_in} seed={seed}")
        return Trajectory(W=W, innovations=kept, seed=seed, burn_in=burn_in)
