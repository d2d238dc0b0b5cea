"""Pydantic models for experiment sweeps."""

import itertools
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator

from .estimator import StepRule
from .theory import Constants
from .var import InnovationFamily, Pattern


class LambdaRuleKind(str, Enum):
    """How the regularization weight is chosen per cell."""

    FIXED = "fixed"
    THEORY = "theory"
    SQRT_LOG = "sqrt_log"


class LambdaRule(BaseModel):
    """Regularization rule: fixed value, 2*Phi/phi0, or c*sqrt(log p / n)."""

    model_config = {"frozen": True}

    kind: LambdaRuleKind = Field(default=LambdaRuleKind.SQRT_LOG)
    value: float = Field(default=0.1, ge=0)
    c: float = Field(default=1.0, gt=0)


class GridSpec(BaseModel):
    """Sweep grid; cells are the Cartesian product in field order."""

    model_config = {"frozen": True}

    p: List[int] = Field(default_factory=lambda: [20])
    k: List[int] = Field(default_factory=lambda: [10])
    n: List[int] = Field(default_factory=lambda: [1000])
    delta: List[float] = Field(default_factory=lambda: [0.0])
    pattern: List[Pattern] = Field(default_factory=lambda: [Pattern.RANDOM_SPARSE])
    family: List[InnovationFamily] = Field(default_factory=lambda: [InnovationFamily.GAUSSIAN])

    @field_validator("p", "k", "n", "delta", "pattern", "family")
    @classmethod
    def validate_non_empty(cls, v: list) -> list:
        """Every axis needs at least one value."""
        if not v:
            raise ValueError("grid axes must not be empty")
        return v

    def cells(self) -> List[dict]:
        """Enumerate grid cells in a fixed order."""
        keys = ["p", "k", "n", "delta", "pattern", "family"]
        values = [getattr(self, key) for key in keys]
        return [dict(zip(keys, combo)) for combo in itertools.product(*values)]


class SolverSettings(BaseModel):
    """Solver options shared by all cells."""

    model_config = {"frozen": True}

    max_iters: int = Field(default=5000, ge=1)
    tol: float = Field(default=1e-9, gt=0)
    step_rule: StepRule = Field(default=StepRule.BACKTRACKING)


class ExperimentConfig(BaseModel):
    """Declarative experiment configuration."""

    model_config = {"frozen": True}

    scenario: str = Field(..., min_length=1)
    grid: GridSpec = Field(default_factory=GridSpec)
    lambda_rule: LambdaRule = Field(default_factory=LambdaRule)
    replications: int = Field(default=1, ge=1)
    master_seed: int = Field(default=0, ge=0)
    output_dir: str = Field(default="results")
    emit_plots: bool = Field(default=False)
    target_rho: float = Field(default=0.5, gt=0, lt=1)
    burn_in: int = Field(default=0, ge=0)
    solver: SolverSettings = Field(default_factory=SolverSettings)
    constants: Constants = Field(default_factory=Constants)


class ResultRow(BaseModel):
    """Measured errors for one (cell, replication, variant)."""

    model_config = {"frozen": True}

    scenario: str
    cell: int
    rep: int
    variant: str
    p: int
    k: int
    n: int
    delta: float
    pattern: str
    family: str
    seed: str
    status: str = "ok"
    failure_reason: str = ""
    lambda_n: Optional[float] = None
    error_F: Optional[float] = Field(None, ge=0)
    error_l1: Optional[float] = Field(None, ge=0)
    false_positives: Optional[int] = Field(None, ge=0)
    false_negatives: Optional[int] = Field(None, ge=0)
    precision: Optional[float] = None
    recall: Optional[float] = None
    iterations: Optional[int] = None
    converged: Optional[bool] = None
    kappa_eps: Optional[float] = None
    kappa0: Optional[float] = None
    theta0: Optional[float] = None
    phi0: Optional[float] = None
    lambda_min: Optional[float] = None
    sample_size_ok: Optional[bool] = None
    predicted_F_error: Optional[float] = None
    predicted_fp_bound: Optional[float] = None
