"""Pydantic domain models."""

from .estimator import (
    Estimate,
    EstimatorConfig,
    EstimatorVariant,
    InitRule,
    StepRule,
    SupportReport,
    ThresholdResult,
)
from .experiment import (
    ExperimentConfig,
    GridSpec,
    LambdaRule,
    LambdaRuleKind,
    ResultRow,
    SolverSettings,
)
from .observation import MaskedSeries, Moments, Scaling
from .spectral import (
    BoundCheck,
    BoundReport,
    DiagScalingReport,
    PsiBoundReport,
    SpectralDiagnostics,
)
from .theory import Certificate, Constants, REReport, RESampler, SChoice, TailReport, TailRow
from .var import InnovationFamily, InnovationSpec, Pattern, Trajectory, TransitionMatrix

__all__ = [
    "BoundCheck",
    "BoundReport",
    "Certificate",
    "Constants",
    "DiagScalingReport",
    "Estimate",
    "EstimatorConfig",
    "EstimatorVariant",
    "ExperimentConfig",
    "GridSpec",
    "InitRule",
    "InnovationFamily",
    "InnovationSpec",
    "LambdaRule",
    "LambdaRuleKind",
    "MaskedSeries",
    "Moments",
    "Pattern",
    "PsiBoundReport",
    "REReport",
    "RESampler",
    "ResultRow",
    "SChoice",
    "Scaling",
    "SolverSettings",
    "SpectralDiagnostics",
    "StepRule",
    "SupportReport",
    "TailReport",
    "TailRow",
    "ThresholdResult",
    "Trajectory",
    "TransitionMatrix",
]
