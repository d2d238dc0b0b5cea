"""Estimator service: non-convex LASSO programs solved by proximal gradient descent."""

import logging
from typing import List, Optional, Tuple, Union

import numpy as np

from ..core.exceptions import InvalidInputError, NumericalFailure
from ..core.linalg import spectral_norm, vec_l1
from ..models.estimator import (
    Estimate,
    EstimatorConfig,
    EstimatorVariant,
    InitRule,
    StepRule,
    SupportReport,
    ThresholdResult,
)
from ..models.observation import Moments
from .proximal import prox_step, project_l1_ball, soft_threshold


logger = logging.getLogger(__name__)

MAX_HALVINGS = 60


class EstimatorService:
    """Service solving the masked-data LASSO programs and thresholding their output."""

    def __init__(self):
        """Initialize estimator service."""
        self.logger = logging.getLogger(self.__class__.__name__)

    def _check_dims(self, B: np.ndarray, M: Moments) -> np.ndarray:
        arr = np.asarray(B, dtype=float)
        if arr.shape != (M.p, M.p):
            raise InvalidInputError(f"B has shape {arr.shape}, moments are {M.p} x {M.p}")
        return arr

    def smooth_objective(self, B: np.ndarray, M: Moments) -> float:
        """tr(B Q B') - 2 <B, L>."""
        arr = self._check_dims(B, M)
        return float(np.sum((arr @ M.Q) * arr) - 2.0 * np.sum(arr * M.L))

    def objective(
        self,
        B: np.ndarray,
        M: Moments,
        lambda_n: float = 0.0,
        variant: EstimatorVariant = EstimatorVariant.REGULARIZED_BALL,
    ) -> float:
        """Composite objective in the scaling recorded by the moments.

        ``lambda_n`` is given in the unbiased convention; raw-scaling moments
        apply the penalty (1 - delta)^2 * lambda_n.

        Args:
            B: Candidate transition matrix
            M: Moments
            lambda_n: Penalty weight
            variant: Program; constrained variants carry no penalty

        Returns:
            Objective value without the B-independent constant
        """
        if lambda_n < 0:
            raise InvalidInputError(f"lambda_n must be non-negative, got {lambda_n}")
        value = self.smooth_objective(B, M)
        if EstimatorVariant(variant).regularized:
            value += M.penalty_factor * lambda_n * vec_l1(B)
        return value

    def gradient(self, B: np.ndarray, M: Moments) -> np.ndarray:
        """Gradient 2(BQ - L) of the smooth part."""
        arr = self._check_dims(B, M)
        return 2.0 * (arr @ M.Q - M.L)

    def _initial(self, M: Moments, cfg: EstimatorConfig, radius: float) -> np.ndarray:
        if cfg.init == InitRule.GIVEN:
            start = self._check_dims(cfg.initial, M)
        elif cfg.init == InitRule.RIDGE:
            # B (Q + r I) = L
            start = np.linalg.solve((M.Q + cfg.ridge * np.eye(M.p)).T, M.L.T).T
        else:
            start = np.zeros((M.p, M.p))
        return project_l1_ball(start, radius)

    def solve(self, M: Moments, cfg: EstimatorConfig) -> Estimate:
        """Run proximal (or projected) gradient descent on one program.

        Iterates B+ = prox_step(B - eta * gradient(B), eta * lambda, radius) until
        the relative objective change falls below ``cfg.tol``.

        Args:
            M: Moments in either scaling
            cfg: Estimator configuration

        Returns:
            Estimate with the objective trace

        Raises:
            InvalidInputError: If full-data variants get masked moments
            NumericalFailure: If the objective becomes non-finite
        """
        if cfg.variant.full_data and M.delta != 0:
            raise InvalidInputError(
                f"{cfg.variant.value} expects full-data moments, got delta={M.delta}"
            )
        radius = cfg.effective_radius
        lam = cfg.effective_lambda * M.penalty_factor

        q_norm = spectral_norm(M.Q)
        eta0 = 1.0 / q_norm if q_norm > 0 else 1.0
        fixed_eta = 0.5 * eta0

        def composite(B: np.ndarray) -> float:
            return self.smooth_objective(B, M) + lam * vec_l1(B)

        B = self._initial(M, cfg, radius)
        current = composite(B)
        trace: List[float] = [current]
        converged = False
        iterations = 0

        for iterations in range(1, cfg.max_iters + 1):
            grad = self.gradient(B, M)
            smooth = current - lam * vec_l1(B)
            if cfg.step_rule == StepRule.FIXED:
                B_next = prox_step(B - fixed_eta * grad, fixed_eta * lam, radius)
            else:
                B_next, accepted = self._backtrack(B, grad, smooth, M, eta0, lam, radius)
                if not accepted:
                    B_next = B
            candidate = composite(B_next)
            if not np.isfinite(candidate):
                raise NumericalFailure(
                    f"objective became non-finite at iteration {iterations}; "
                    "use the backtracking step rule"
                )
            if cfg.step_rule == StepRule.BACKTRACKING and candidate > current:
                # Rounding-level increase; the previous iterate is kept
                B_next, candidate = B, current
            trace.append(candidate)
            change = abs(candidate - current)
            B, previous, current = B_next, current, candidate
            if change <= cfg.tol * max(abs(previous), abs(current), np.finfo(float).tiny):
                converged = True
                break

        estimate = Estimate(
            B_hat=B,
            objective_trace=trace,
            iterations=iterations,
            converged=converged,
            variant=cfg.variant,
            lambda_n=cfg.effective_lambda,
            radius=radius,
            scaling=M.scaling,
            step_rule=cfg.step_rule,
        )
        if converged:
            self.logger.info(
                f"Solved {cfg.variant.value} in {iterations} iterations, "
                f"objective {estimate.final_objective:.6g}"
            )
        else:
            self.logger.warning(
                f"{cfg.variant.value} did not converge in {cfg.max_iters} iterations"
            )
        return estimate

    def _backtrack(
        self,
        B: np.ndarray,
        grad: np.ndarray,
        smooth: float,
        M: Moments,
        eta0: float,
        lam: float,
        radius: float,
    ) -> Tuple[np.ndarray, bool]:
        """Halve the step from eta0 until the proximal sufficient-decrease test holds."""
        eta = eta0
        for _ in range(MAX_HALVINGS):
            B_next = prox_step(B - eta * grad, eta * lam, radius)
            step = B_next - B
            bound = smooth + float(np.sum(grad * step)) + float(np.sum(step**2)) / (2.0 * eta)
            if self.smooth_objective(B_next, M) <= bound:
                return B_next, True
            eta *= 0.5
        return B, False

    def support_report(self, T: np.ndarray, B0: np.ndarray) -> SupportReport:
        """Compare the support of an estimate with the true support."""
        estimated = np.asarray(T) != 0
        truth = np.asarray(B0) != 0
        if estimated.shape != truth.shape:
            raise InvalidInputError(f"shapes differ: {estimated.shape} vs {truth.shape}")
        true_pos = int(np.sum(estimated & truth))
        n_est, n_true = int(estimated.sum()), int(truth.sum())
        return SupportReport(
            estimated_support_size=n_est,
            true_support_size=n_true,
            false_positives=int(np.sum(estimated & ~truth)),
            false_negatives=int(np.sum(~estimated & truth)),
            precision=true_pos / n_est if n_est else 1.0,
            recall=true_pos / n_true if n_true else 1.0,
        )

    def hard_threshold(
        self,
        estimate: Union[Estimate, np.ndarray],
        lambda_n: float,
        B0: Optional[np.ndarray] = None,
    ) -> ThresholdResult:
        """Keep the entries with |B_hat_ij| > lambda_n.

        Args:
            estimate: Estimate or raw matrix
            lambda_n: Threshold
            B0: Optional true matrix for the support report

        Returns:
            Thresholded matrix and support report
        """
        if lambda_n < 0:
            raise InvalidInputError(f"lambda_n must be non-negative, got {lambda_n}")
        B_hat = np.asarray(
            estimate.B_hat if isinstance(estimate, Estimate) else estimate, dtype=float
        )
        T = np.where(np.abs(B_hat) > lambda_n, B_hat, 0.0)
        report = self.support_report(T, B0) if B0 is not None else None
        return ThresholdResult(
            T_tilde=T,
            lambda_n=lambda_n,
            support_size=int(np.count_nonzero(T)),
            report=report,
        )

    def full_data_lasso_cd(
        self,
        M: Moments,
        lambda_n: float,
        max_sweeps: int = 10000,
        tol: float = 1e-12,
    ) -> np.ndarray:
        """Coordinate-descent LASSO on tr(BQB') - 2<B, L> + lambda ||B||_1.

        Reference solver used by the test suite to cross-check ``solve`` on
        complete data; it needs positive semi-definite Q and solves rows
        independently.
        """
        if lambda_n < 0:
            raise InvalidInputError(f"lambda_n must be non-negative, got {lambda_n}")
        Q, L = np.asarray(M.Q), np.asarray(M.L)
        lam = lambda_n * M.penalty_factor
        p = M.p
        B = np.zeros((p, p))
        diag = np.diag(Q)
        for i in range(p):
            b = B[i]
            for _ in range(max_sweeps):
                largest = 0.0
                for j in range(p):
                    if diag[j] <= 0:
                        continue
                    partial = L[i, j] - (Q[j] @ b - Q[j, j] * b[j])
                    new = float(soft_threshold(partial, 0.5 * lam)) / diag[j]
                    largest = max(largest, abs(new - b[j]))
                    b[j] = new
                if largest <= tol:
                    break
        return B
