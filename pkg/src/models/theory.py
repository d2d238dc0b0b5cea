"""Pydantic models for certificates and verification reports."""

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field


class Constants(BaseModel):
    """Universal constants of the error bounds.

    ``c1`` is accepted for completeness but enters no formula.
    """

    model_config = {"frozen": True}

    c0: float = Field(default=1.0, gt=0)
    c1: float = Field(default=1.0, gt=0)
    c_a: float = Field(default=1.0, gt=0)


class Certificate(BaseModel):
    """Every quantity of the main error bound for one problem instance."""

    model_config = {"frozen": True}

    p: int
    n: int
    k: int
    delta: float
    b0: float
    lambda_n: float
    lambda_from_theory: bool
    kappa_eps: float
    kappa0: float
    theta0: float
    vartheta0: float
    vartheta1: float
    vartheta2: float
    h: float
    zeta: float
    Phi: float
    phi0: float
    lambda_min: float
    s_choice: float
    sample_size_lhs: float
    sample_size_rhs: Optional[float]
    sample_size_ok: bool
    zeta_condition_ok: bool
    b0_ok: bool
    predicted_F_error: float
    predicted_l1_error: float
    predicted_fp_bound: float
    probability_bound: float
    constants: Constants

    def summary(self) -> dict:
        """Flat subset used in experiment result rows."""
        return {
            "kappa_eps": self.kappa_eps,
            "kappa0": self.kappa0,
            "theta0": self.theta0,
            "phi0": self.phi0,
            "lambda_min": self.lambda_min,
            "sample_size_ok": self.sample_size_ok,
            "predicted_F_error": self.predicted_F_error,
            "predicted_fp_bound": self.predicted_fp_bound,
        }


class SChoice(BaseModel):
    """Sparsity level s used for the restricted eigenvalue argument."""

    model_config = {"frozen": True}

    s: float
    s_floor: int
    s_at_least_one: bool


class RESampler(str, Enum):
    """Direction sampler of the restricted eigenvalue check."""

    SPARSE_RANDOM = "sparse_random"
    EXTREME_POINTS = "extreme_points"


class REReport(BaseModel):
    """Sampled evaluation of v'Qv >= alpha ||v||_2^2 - tau ||v||_1^2."""

    model_config = {"frozen": True}

    alpha_low: float
    tau_low: float
    sampler: RESampler
    samples: int
    sparsity: int
    violations: int
    worst_margin: float
    alpha_hat: float


class TailRow(BaseModel):
    """Empirical and bound tail probabilities at one threshold."""

    model_config = {"frozen": True}

    t: float
    empirical: float
    bound: float
    empirical_diag: float
    bound_diag: float


class TailReport(BaseModel):
    """Monte Carlo tails of the quadratic-form deviations."""

    model_config = {"frozen": True}

    n: int
    trials: int
    delta: float
    c_a: float
    ccp_constant: float
    v_support: int
    support_condition_ok: bool
    scale: float
    scale_diag: float
    median_deviation: float
    median_deviation_diag: float
    minimal_c_a: float
    minimal_c_a_diag: float
    rows: List[TailRow]
