"""Observation service: Bernoulli masking and bias-corrected moments."""

import logging
from typing import Optional, Tuple

import numpy as np

from ..core.exceptions import InvalidInputError
from ..core.linalg import as_square
from ..core.seeding import Stream, derive_rng
from ..models.observation import MaskedSeries, Moments, Scaling
from ..models.var import Trajectory
from .var_service import MatrixLike, VarProcessService


logger = logging.getLogger(__name__)


class ObservationService:
    """Service for the missing-data observation process and its moments."""

    def __init__(self, var_service: Optional[VarProcessService] = None):
        """Initialize observation service.

        Args:
            var_service: Process service used for population moments
        """
        self.var_service = var_service or VarProcessService()
        self.logger = logging.getLogger(self.__class__.__name__)

    def apply_bernoulli_mask(self, trajectory: Trajectory, delta: float, seed: int) -> MaskedSeries:
        """Keep each entry of W independently with probability 1 - delta.

        Args:
            trajectory: Full trajectory
            delta: Missing probability in [0, 1)
            seed: Seed of the mask stream

        Returns:
            Masked series with its mask

        Raises:
            InvalidInputError: If delta is outside [0, 1)
        """
        if not 0.0 <= delta < 1.0:
            raise InvalidInputError(f"delta must lie in [0, 1), got {delta}")
        rng = derive_rng(seed, Stream.MASK)
        mask = rng.random(trajectory.W.shape) >= delta
        W_bar = np.where(mask, trajectory.W, 0.0)
        return MaskedSeries(W_bar=W_bar, mask=mask, delta=delta, seed=seed)

    def mask_covariance(self, delta: float, p: int) -> np.ndarray:
        """P = (1-delta)^2 * ones + delta (1-delta) I."""
        return (1.0 - delta) ** 2 * np.ones((p, p)) + delta * (1.0 - delta) * np.eye(p)

    def bernoulli_mask_autocovariance(self, delta: float, p: int) -> Tuple[np.ndarray, np.ndarray]:
        """Lag-0 and lag-1 second moments of the Bernoulli mask."""
        if not 0.0 <= delta < 1.0:
            raise InvalidInputError(f"delta must lie in [0, 1), got {delta}")
        return self.mask_covariance(delta, p), (1.0 - delta) ** 2 * np.ones((p, p))

    def _sample_products(self, ms: MaskedSeries) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        if ms.n < 1:
            raise InvalidInputError("series has no transitions")
        X, Y = ms.X_bar, ms.Y_bar
        S0 = X @ X.T
        S0 = 0.5 * (S0 + S0.T)
        S1 = Y @ X.T
        D_bar = np.diag(np.sqrt(np.diag(S0) / ms.n))
        return S0, S1, D_bar

    def build_moments(self, ms: MaskedSeries, scaling: Scaling = Scaling.UNBIASED) -> Moments:
        """Bias-corrected Q, L and Dbar for a Bernoulli-masked series.

        Args:
            ms: Masked series
            scaling: ``raw`` or ``unbiased`` convention

        Returns:
            Moments in the requested scaling
        """
        scaling = Scaling(scaling)
        if scaling == Scaling.UNBIASED:
            return self.build_moments_general(
                ms, *self.bernoulli_mask_autocovariance(ms.delta, ms.p)
            )
        S0, S1, D_bar = self._sample_products(ms)
        n, delta = ms.n, ms.delta
        Q = (S0 - delta * np.diag(np.diag(S0))) / n
        L = S1 / n
        Q = 0.5 * (Q + Q.T)
        return Moments(Q=Q, L=L, D_bar=D_bar, delta=delta, scaling=scaling, n=n)

    def build_moments_general(
        self,
        ms: MaskedSeries,
        gamma_m0: np.ndarray,
        gamma_m1: np.ndarray,
    ) -> Moments:
        """Moments corrected by an arbitrary stationary mask autocovariance.

        Args:
            ms: Masked series
            gamma_m0: Lag-0 mask second moment, no zero entries
            gamma_m1: Lag-1 mask second moment, no zero entries

        Returns:
            Unbiased-scaling moments

        Raises:
            InvalidInputError: If either mask moment has a zero entry
        """
        gamma_m0 = as_square(gamma_m0, "gamma_m0")
        gamma_m1 = as_square(gamma_m1, "gamma_m1")
        if gamma_m0.shape != (ms.p, ms.p) or gamma_m1.shape != (ms.p, ms.p):
            raise InvalidInputError("mask autocovariances must be p x p")
        if np.any(gamma_m0 == 0) or np.any(gamma_m1 == 0):
            raise InvalidInputError("mask autocovariances must have no zero entries")

        S0, S1, D_bar = self._sample_products(ms)
        Q = (S0 / ms.n) / gamma_m0
        Q = 0.5 * (Q + Q.T)
        L_transposed = (S1.T / ms.n) / gamma_m1
        return Moments(
            Q=Q,
            L=L_transposed.T,
            D_bar=D_bar,
            delta=ms.delta,
            scaling=Scaling.UNBIASED,
            n=ms.n,
        )

    def estimate_delta(self, ms: MaskedSeries) -> float:
        """Plug-in missing rate 1 - observed fraction."""
        return float(1.0 - ms.observed_fraction)

    def population_moments(self, B: MatrixLike, covariance: np.ndarray, n: int = 1) -> Moments:
        """Exact moments Q = Gamma_w(0), L = Gamma_w(1)' in the unbiased convention."""
        gamma0 = self.var_service.stationary_covariance(B, covariance)
        gamma1 = self.var_service.autocovariance(B, covariance, 1)
        return Moments(
            Q=gamma0,
            L=gamma1.T,
            D_bar=np.diag(np.sqrt(np.diag(gamma0))),
            delta=0.0,
            scaling=Scaling.UNBIASED,
            n=n,
        )
