"""Theory service: error-bound certificates and Monte Carlo verification harnesses."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike

from ..core.config import get_settings
from ..core.exceptions import InvalidInputError
from ..core.linalg import max_abs, nnz, norm_2_to_inf
from ..core.seeding import Stream, derive_rng, hash64
from ..models.experiment import LambdaRule, LambdaRuleKind
from ..models.observation import Moments, Scaling
from ..models.spectral import SpectralDiagnostics
from ..models.theory import (
    Certificate,
    Constants,
    REReport,
    RESampler,
    SChoice,
    TailReport,
    TailRow,
)
from ..models.var import InnovationSpec
from .observation_service import ObservationService
from .spectral_service import SpectralService
from .var_service import MatrixLike, VarProcessService, entries_of


logger = logging.getLogger(__name__)

SYMMETRY_RTOL = 1e-12
UNIT_NORM_TOL = 1e-10


class TheoryService:
    """Service computing certificates and empirically checking the bound ingredients."""

    def __init__(
        self,
        constants: Optional[Constants] = None,
        var_service: Optional[VarProcessService] = None,
        observation_service: Optional[ObservationService] = None,
        spectral_service: Optional[SpectralService] = None,
        min_trials: Optional[int] = None,
    ):
        """Initialize theory service.

        Args:
            constants: Universal constants; defaults come from settings
            var_service: Process service
            observation_service: Masking and moments service
            spectral_service: Transfer-function service
            min_trials: Smallest accepted Monte Carlo trial count
        """
        settings = get_settings()
        self.constants = constants or Constants(
            c0=settings.UNIVERSAL_C0, c1=settings.UNIVERSAL_C1, c_a=settings.UNIVERSAL_CA
        )
        self.var_service = var_service or VarProcessService()
        self.observation_service = observation_service or ObservationService(self.var_service)
        self.spectral_service = spectral_service or SpectralService(var_service=self.var_service)
        self.min_trials = min_trials or settings.MC_MIN_TRIALS
        self.logger = logging.getLogger(self.__class__.__name__)

    def innovation_condition_number(self, spec: InnovationSpec, c_a: float) -> float:
        """kappa_eps = 36 sqrt(c_a c_eps^2 ||Sigma||_2) ||Sigma^-1||_2."""
        return float(
            36.0
            * np.sqrt(c_a * spec.ccp_constant**2 * spec.covariance_norm)
            * spec.inverse_covariance_norm
        )

    def choose_s(
        self,
        *,
        delta: float,
        n: int,
        p: int,
        k: int,
        h: float,
        kappa_eps: float,
        kappa0: float,
        theta0: float,
    ) -> SChoice:
        """s = (1-delta)^2/(kappa_eps kappa0) * 4hk/(1 + 4k theta0) * sqrt(n / log p)."""
        s = (
            (1.0 - delta) ** 2
            / (kappa_eps * kappa0)
            * 4.0 * h * k / (1.0 + 4.0 * k * theta0)
            * np.sqrt(n / np.log(p))
        )
        return SChoice(s=float(s), s_floor=int(np.floor(s)), s_at_least_one=bool(s >= 1.0))

    def error_certificate(
        self,
        B0: MatrixLike,
        spec: InnovationSpec,
        delta: float,
        n: int,
        b0: float,
        lambda_n: Optional[float] = None,
        constants: Optional[Constants] = None,
        diagnostics: Optional[SpectralDiagnostics] = None,
    ) -> Certificate:
        """Evaluate every quantity of the main error bound.

        Args:
            B0: Stable true transition matrix with k >= 1
            spec: Innovation distribution (supplies Sigma and c_eps)
            delta: Missing probability
            n: Sample size
            b0: Frobenius radius parameter
            lambda_n: Regularization weight; 2 Phi / phi0 when omitted
            constants: Universal constants; service defaults when omitted
            diagnostics: Precomputed spectral diagnostics of B0

        Returns:
            Certificate with the sample-size verdict and predicted errors

        Raises:
            InvalidInputError: If a precondition fails
            UnstableTransitionError: If rho(B0) >= 1
        """
        constants = constants or self.constants
        B = self.var_service.require_stable(B0)
        p = B.shape[0]
        k = nnz(B)
        if k < 1:
            raise InvalidInputError("k >= 1 required")
        if not 0.0 <= delta < 1.0:
            raise InvalidInputError(f"delta must lie in [0, 1), got {delta}")
        if n < 2 or p < 2:
            raise InvalidInputError(f"n and p must be >= 2, got n={n}, p={p}")
        if b0 <= 0:
            raise InvalidInputError(f"b0 must be positive, got {b0}")
        if spec.p != p:
            raise InvalidInputError(f"innovation dimension {spec.p} != p = {p}")

        diag = diagnostics or self.spectral_service.diagnostics(B)
        frob = float(np.linalg.norm(B))
        b0_ok = b0 >= frob
        if not b0_ok:
            self.logger.warning(f"b0 = {b0:.6g} is below ||B0||_F = {frob:.6g}")

        kappa_eps = self.innovation_condition_number(spec, constants.c_a)
        kappa0, theta0 = diag.kappa0, diag.theta0
        h = b0 / (7.0 * (norm_2_to_inf(B) ** 2 + 1.0) * np.sqrt(k))
        zeta = (1.0 + delta * theta0 * k) / (h * k)
        log_ratio = np.sqrt(np.log(p) / n)
        lhs = 1.0 / log_ratio

        zeta_ok = bool(zeta > 27.0 * delta * theta0)
        rhs = None
        if zeta_ok:
            rhs = float(
                kappa_eps * kappa0 * zeta
                / ((1.0 - delta) ** 2 * (zeta / 27.0 - delta * theta0) ** 2)
            )
        sample_size_ok = bool(zeta_ok and lhs >= rhs)

        Phi = (
            constants.c0 * b0 * np.sqrt(k) / 7.0
            * kappa_eps * kappa0 * zeta / (1.0 - delta) ** 2
            * log_ratio
        )
        phi0 = constants.c0 * diag.vartheta0**2 * spec.inverse_covariance_norm
        lambda_min = 2.0 * Phi / phi0
        lam = lambda_min if lambda_n is None else float(lambda_n)

        s_choice = self.choose_s(
            delta=delta, n=n, p=p, k=k, h=h,
            kappa_eps=kappa_eps, kappa0=kappa0, theta0=theta0,
        )
        certificate = Certificate(
            p=p,
            n=n,
            k=k,
            delta=delta,
            b0=b0,
            lambda_n=lam,
            lambda_from_theory=lambda_n is None,
            kappa_eps=kappa_eps,
            kappa0=kappa0,
            theta0=theta0,
            vartheta0=diag.vartheta0,
            vartheta1=diag.vartheta1,
            vartheta2=diag.vartheta2,
            h=float(h),
            zeta=float(zeta),
            Phi=float(Phi),
            phi0=float(phi0),
            lambda_min=float(lambda_min),
            s_choice=s_choice.s,
            sample_size_lhs=float(lhs),
            sample_size_rhs=rhs,
            sample_size_ok=sample_size_ok,
            zeta_condition_ok=zeta_ok,
            b0_ok=b0_ok,
            predicted_F_error=float(2.0 * np.sqrt(k) * phi0 * lam),
            predicted_l1_error=float(16.0 * k * phi0 * lam),
            predicted_fp_bound=float(112.0 * k * phi0),
            probability_bound=1.0 - 10.0 / p,
            constants=constants,
        )
        self.logger.debug(f"Certificate p={p} n={n} k={k}: sample_size_ok={sample_size_ok}")
        return certificate

    def lambda_from_rule(
        self,
        rule: LambdaRule,
        p: int,
        n: int,
        certificate: Optional[Certificate] = None,
    ) -> float:
        """Regularization weight for one grid cell."""
        if rule.kind == LambdaRuleKind.FIXED:
            return rule.value
        if rule.kind == LambdaRuleKind.SQRT_LOG:
            return float(rule.c * np.sqrt(np.log(p) / n))
        if certificate is None:
            raise InvalidInputError("the theory lambda rule needs a certificate")
        return certificate.lambda_min

    def _sample_directions(
        self, p: int, sparsity: int, sampler: RESampler, trials: int, seed: int
    ) -> np.ndarray:
        rng = derive_rng(seed, Stream.RE_SAMPLER)
        rows = []
        if sampler == RESampler.EXTREME_POINTS:
            rows.extend(np.eye(p))
        for _ in range(trials):
            support = rng.choice(p, size=sparsity, replace=False)
            v = np.zeros(p)
            if sampler == RESampler.EXTREME_POINTS:
                v[support] = rng.choice([-1.0, 1.0], size=sparsity)
            else:
                v[support] = rng.standard_normal(sparsity)
            norm = np.linalg.norm(v)
            if norm > 0:
                rows.append(v / norm)
        return np.array(rows)

    def check_re(
        self,
        Q: ArrayLike,
        alpha_low: float,
        tau_low: float,
        sampler: RESampler = RESampler.SPARSE_RANDOM,
        trials: int = 1000,
        s: int = 1,
        seed: int = 0,
    ) -> REReport:
        """Sample v'Qv >= alpha ||v||_2^2 - tau ||v||_1^2 on 2s-sparse unit vectors.

        ``extreme_points`` adds every coordinate vector and uses equal-magnitude
        sign patterns on random supports.

        Raises:
            InvalidInputError: If Q is not symmetric or trials/s < 1
        """
        Q = np.asarray(Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise InvalidInputError(f"Q must be square, got {Q.shape}")
        if max_abs(Q - Q.T) > SYMMETRY_RTOL * max(max_abs(Q), 1.0):
            raise InvalidInputError("Q must be symmetric")
        if trials < 1 or s < 1:
            raise InvalidInputError(f"trials and s must be >= 1, got {trials}, {s}")

        sampler = RESampler(sampler)
        p = Q.shape[0]
        sparsity = min(2 * s, p)
        V = self._sample_directions(p, sparsity, sampler, trials, seed)
        quad = np.einsum("ij,jk,ik->i", V, Q, V)
        l2 = np.sum(V**2, axis=1)
        l1 = np.sum(np.abs(V), axis=1)
        margins = quad - (alpha_low * l2 - tau_low * l1**2)
        slack = 1e-12 * max(1.0, abs(alpha_low))
        return REReport(
            alpha_low=alpha_low,
            tau_low=tau_low,
            sampler=sampler,
            samples=int(V.shape[0]),
            sparsity=sparsity,
            violations=int(np.sum(margins < -slack)),
            worst_margin=float(np.min(margins)),
            alpha_hat=float(np.min(quad / l2)),
        )

    def deviation_stat(self, B0: MatrixLike, M: Moments) -> float:
        """||B0 Q - L||_inf for unbiased-scaling moments."""
        if M.scaling != Scaling.UNBIASED:
            raise InvalidInputError("deviation_stat needs unbiased-scaling moments")
        B = entries_of(B0, "B0")
        if B.shape != (M.p, M.p):
            raise InvalidInputError(f"B0 has shape {B.shape}, moments are {M.p} x {M.p}")
        return max_abs(B @ M.Q - M.L)

    def population_deviation(self, B0: MatrixLike, covariance: np.ndarray) -> float:
        """Deviation statistic on the exact moments (zero up to rounding)."""
        return self.deviation_stat(B0, self.observation_service.population_moments(B0, covariance))

    def mc_concentration(
        self,
        B: MatrixLike,
        spec: InnovationSpec,
        delta: float,
        v: ArrayLike,
        n: int,
        trials: int,
        t_grid: Sequence[float],
        seed: int = 0,
        c_a: Optional[float] = None,
        enforce_support: bool = True,
        burn_in: int = 0,
        threads: int = 1,
    ) -> TailReport:
        """Monte Carlo tails of the masked quadratic-form deviations.

        Each trial draws a trajectory and a mask, and records
        |v'((1/n) Xbar Xbar' - Gamma_wbar(0)) v| and its diagonal (Hadamard with I)
        counterpart, where Gamma_wbar(0) = Gamma_w(0) * P is the second moment of
        the masked process. Exceedance frequencies at t * vartheta1^2 ||Sigma||_2
        and t * ||v||_0 vartheta2^2 ||Sigma||_2 are compared with the bound curves
        2 exp(-(n ||Sigma||_2 / (c_a c_eps^2)) min(t^2, t)), the diagonal one with
        an extra factor ||v||_0 in the exponent.

        Args:
            B: Stable transition matrix
            spec: Innovation distribution
            delta: Missing probability
            v: Unit vector
            n: Horizon per trial
            trials: Number of trials (at least the configured minimum)
            t_grid: Thresholds t
            seed: Base seed; trial i uses its own derived stream
            c_a: Constant of the bound curve; service default when omitted
            enforce_support: Raise when ||v||_0 < 2 ||B||_0 instead of warning
            burn_in: Transitions discarded before each trial
            threads: Worker threads for the trials; results do not depend on it

        Returns:
            Tail report with the minimal c_a the empirical tails allow
        """
        arr = self.var_service.require_stable(B)
        p = arr.shape[0]
        c_a = c_a or self.constants.c_a
        if trials < self.min_trials:
            raise InvalidInputError(
                f"at least {self.min_trials} trials are needed for tail estimates, got {trials}"
            )
        v = np.asarray(v, dtype=float).reshape(-1)
        if v.shape != (p,) or abs(np.linalg.norm(v) - 1.0) > UNIT_NORM_TOL:
            raise InvalidInputError("v must be a unit vector of length p")
        if not 0.0 <= delta < 1.0:
            raise InvalidInputError(f"delta must lie in [0, 1), got {delta}")

        support = nnz(v)
        support_ok = support >= 2 * nnz(arr)
        if not support_ok:
            message = f"||v||_0 = {support} is below 2 ||B||_0 = {2 * nnz(arr)}"
            if enforce_support:
                raise InvalidInputError(message)
            self.logger.warning(message)

        gamma_bar = self.var_service.stationary_covariance(arr, spec.covariance) * (
            self.observation_service.mask_covariance(delta, p)
        )
        v1 = self.spectral_service.vartheta(arr, 1)
        v2 = self.spectral_service.vartheta(arr, 2)
        sigma_norm = spec.covariance_norm
        scale = v1**2 * sigma_norm
        scale_diag = support * v2**2 * sigma_norm

        v_sq = v**2

        def run_trial(i: int) -> Tuple[float, float]:
            trial_seed = hash64(seed, int(Stream.TRIAL), i)
            trajectory = self.var_service.simulate(arr, spec, n, trial_seed, burn_in=burn_in)
            masked = self.observation_service.apply_bernoulli_mask(trajectory, delta, trial_seed)
            X = masked.X_bar
            centered = (X @ X.T) / n - gamma_bar
            return abs(float(v @ centered @ v)), abs(float(np.sum(v_sq * np.diag(centered))))

        with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
            outcomes = list(executor.map(run_trial, range(trials)))
        deviations = np.array([outcome[0] for outcome in outcomes])
        deviations_diag = np.array([outcome[1] for outcome in outcomes])

        exponent = n * sigma_norm / spec.ccp_constant**2
        rows = []
        worst, worst_diag = 0.0, 0.0
        for t in t_grid:
            t = float(t)
            if t <= 0:
                raise InvalidInputError(f"thresholds must be positive, got {t}")
            m = min(t * t, t)
            freq = float(np.mean(deviations >= t * scale))
            freq_diag = float(np.mean(deviations_diag >= t * scale_diag))
            if freq > 0:
                worst = max(worst, exponent * m / np.log(2.0 / freq))
            if freq_diag > 0:
                worst_diag = max(worst_diag, support * exponent * m / np.log(2.0 / freq_diag))
            rows.append(
                TailRow(
                    t=t,
                    empirical=freq,
                    bound=float(2.0 * np.exp(-exponent * m / c_a)),
                    empirical_diag=freq_diag,
                    bound_diag=float(2.0 * np.exp(-support * exponent * m / c_a)),
                )
            )

        self.logger.info(f"Concentration harness finished: n={n} trials={trials}")
        return TailReport(
            n=n,
            trials=trials,
            delta=delta,
            c_a=c_a,
            ccp_constant=spec.ccp_constant,
            v_support=support,
            support_condition_ok=support_ok,
            scale=float(scale),
            scale_diag=float(scale_diag),
            median_deviation=float(np.median(deviations)),
            median_deviation_diag=float(np.median(deviations_diag)),
            minimal_c_a=float(worst),
            minimal_c_a_diag=float(worst_diag),
            rows=rows,
        )

    def cross_moment_identity_check(
        self,
        X_bar: ArrayLike,
        Y_bar: ArrayLike,
        gamma0: ArrayLike,
        gamma1: ArrayLike,
        u: ArrayLike,
        v: ArrayLike,
    ) -> float:
        """Absolute residual of the polarization identity for the cross moment.

        Left side: 2 u'((1/n) Xbar Ybar' - Gamma1) v. Right side: the deviation of
        the stacked quadratic form in [u; v] minus the two diagonal deviations.
        """
        X = np.asarray(X_bar, dtype=float)
        Y = np.asarray(Y_bar, dtype=float)
        G0 = np.asarray(gamma0, dtype=float)
        G1 = np.asarray(gamma1, dtype=float)
        u = np.asarray(u, dtype=float).reshape(-1)
        v = np.asarray(v, dtype=float).reshape(-1)
        if X.shape != Y.shape or X.shape[0] != u.size or u.shape != v.shape:
            raise InvalidInputError("dimension mismatch in cross moment identity")
        n = X.shape[1]

        lhs = 2.0 * u @ ((X @ Y.T) / n - G1) @ v
        stacked = np.concatenate([u, v])
        joint = np.block([[G0, G1], [G1.T, G0]])
        combined = X.T @ u + Y.T @ v
        rhs = (
            combined @ combined / n
            - stacked @ joint @ stacked
            - (u @ X @ X.T @ u / n - u @ G0 @ u)
            - (v @ Y @ Y.T @ v / n - v @ G0 @ v)
        )
        return float(abs(lhs - rhs))
