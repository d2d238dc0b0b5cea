"""Pydantic models for the LASSO estimators."""

from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from .arrays import ARRAY_MODEL_CONFIG, FloatArray
from .observation import Scaling


class EstimatorVariant(str, Enum):
    """Estimator program."""

    REGULARIZED_BALL = "regularized_ball"
    CONSTRAINED = "constrained"
    FULL_DATA_REGULARIZED = "full_data_regularized"
    FULL_DATA_CONSTRAINED = "full_data_constrained"

    @property
    def regularized(self) -> bool:
        """Whether the program carries an l1 penalty."""
        return self in (EstimatorVariant.REGULARIZED_BALL, EstimatorVariant.FULL_DATA_REGULARIZED)

    @property
    def full_data(self) -> bool:
        """Whether the program expects delta = 0 moments."""
        return self in (
            EstimatorVariant.FULL_DATA_REGULARIZED,
            EstimatorVariant.FULL_DATA_CONSTRAINED,
        )


class StepRule(str, Enum):
    """Step-size rule of the gradient iterations."""

    FIXED = "fixed"
    BACKTRACKING = "backtracking"


class InitRule(str, Enum):
    """Starting point of the iterations."""

    ZERO = "zero"
    RIDGE = "ridge"
    GIVEN = "given"


class EstimatorConfig(BaseModel):
    """Configuration of one solve."""

    model_config = ARRAY_MODEL_CONFIG

    variant: EstimatorVariant = Field(default=EstimatorVariant.REGULARIZED_BALL)
    lambda_n: float = Field(default=0.0, ge=0)
    b0: Optional[float] = Field(None, gt=0)
    radius: Optional[float] = Field(None)
    k_hint: Optional[int] = Field(None, ge=1)
    max_iters: int = Field(default=5000, ge=1)
    step_rule: StepRule = Field(default=StepRule.BACKTRACKING)
    tol: float = Field(default=1e-9, gt=0)
    init: InitRule = Field(default=InitRule.ZERO)
    initial: Optional[FloatArray] = None
    ridge: float = Field(default=1e-3, gt=0)

    @model_validator(mode="after")
    def validate_variant(self) -> "EstimatorConfig":
        """Each variant carries what its feasible set needs."""
        if self.variant == EstimatorVariant.REGULARIZED_BALL:
            if self.radius is None and (self.b0 is None or self.k_hint is None):
                raise ValueError("regularized_ball needs b0 and k_hint (or an explicit radius)")
        if self.variant in (EstimatorVariant.CONSTRAINED, EstimatorVariant.FULL_DATA_CONSTRAINED):
            if self.radius is None:
                raise ValueError(f"{self.variant.value} needs a radius")
        if self.radius is not None and self.radius < 0:
            raise ValueError(f"radius must be non-negative, got {self.radius}")
        if self.init == InitRule.GIVEN and self.initial is None:
            raise ValueError("init='given' needs an initial matrix")
        return self

    @property
    def effective_radius(self) -> float:
        """l1 radius of the feasible ball (inf when unconstrained)."""
        if self.radius is not None:
            return float(self.radius)
        if self.variant == EstimatorVariant.REGULARIZED_BALL:
            return float(self.b0 * np.sqrt(self.k_hint))
        return float("inf")

    @property
    def effective_lambda(self) -> float:
        """Penalty weight; constrained programs carry none."""
        return self.lambda_n if self.variant.regularized else 0.0


class Estimate(BaseModel):
    """Solver output."""

    model_config = ARRAY_MODEL_CONFIG

    B_hat: FloatArray
    objective_trace: List[float]
    iterations: int = Field(..., ge=0)
    converged: bool
    variant: EstimatorVariant
    lambda_n: float
    radius: float
    scaling: Scaling
    step_rule: StepRule

    @property
    def final_objective(self) -> float:
        """Last recorded objective value."""
        return self.objective_trace[-1]

    def metadata(self) -> dict:
        """JSON metadata of the estimate."""
        return {
            "variant": self.variant.value,
            "lambda_n": self.lambda_n,
            "radius": self.radius,
            "iterations": self.iterations,
            "final_objective": self.final_objective,
            "converged": self.converged,
            "scaling": self.scaling.value,
            "step_rule": self.step_rule.value,
        }


class SupportReport(BaseModel):
    """Support recovery of a thresholded estimate against the truth."""

    model_config = {"frozen": True}

    estimated_support_size: int
    true_support_size: int
    false_positives: int
    false_negatives: int
    precision: float
    recall: float


class ThresholdResult(BaseModel):
    """Hard-thresholded estimate with an optional support report."""

    model_config = ARRAY_MODEL_CONFIG

    T_tilde: FloatArray
    lambda_n: float
    support_size: int
    report: Optional[SupportReport] = None
