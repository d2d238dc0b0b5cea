"""Pydantic models for transfer-function diagnostics and bound reports."""

from typing import List, Optional

from pydantic import BaseModel, Field


class SpectralDiagnostics(BaseModel):
    """Transfer-function quantities of a stable transition matrix."""

    model_config = {"frozen": True}

    rho: float = Field(..., ge=0)
    vartheta0: float = Field(..., gt=0)
    vartheta1: float = Field(..., gt=0)
    vartheta2: float = Field(..., gt=0)
    theta0: float = Field(..., gt=0)
    kappa0: float = Field(..., gt=0)
    k: int = Field(..., ge=0)
    p: int = Field(..., ge=1)
    grid_points: int = Field(..., ge=64)
    refinement_tol: float = Field(..., gt=0)
    support_J: List[int] = Field(default_factory=list)

    def invariant_flags(self, tol: float = 1e-6) -> dict:
        """Evaluate the ordering and range invariants of the diagnostics."""
        k = max(self.k, 1)
        return {
            "vartheta2_le_vartheta1": self.vartheta2 <= self.vartheta1 * (1 + tol),
            "vartheta1_le_sqrt2k_vartheta2": self.vartheta1
            <= (2 * k) ** 0.5 * self.vartheta2 * (1 + tol),
            "theta0_in_range": 1.0 / (2 * k) * (1 - tol) <= self.theta0 <= 1.0 + tol,
            "kappa0_consistent": abs(self.kappa0 - self.vartheta0**2 * self.vartheta1**2)
            <= 1e-10 * self.kappa0,
        }


class BoundCheck(BaseModel):
    """One inequality lhs <= rhs evaluated on a matrix."""

    model_config = {"frozen": True}

    name: str
    lhs: Optional[float] = None
    rhs: Optional[float] = None
    applicable: bool = True
    asserted: bool = True
    satisfied: Optional[bool] = None


class BoundReport(BaseModel):
    """Norm bounds relating B to its transfer-function quantities."""

    model_config = {"frozen": True}

    diagnostics: SpectralDiagnostics
    eigenvector_condition: float
    diagonalizable: bool
    checks: List[BoundCheck]

    @property
    def violations(self) -> List[BoundCheck]:
        """Applicable checks that failed."""
        return [c for c in self.checks if c.applicable and c.asserted and c.satisfied is False]


class PsiBoundReport(BaseModel):
    """Brute-force evaluation of the Psi_n product norm chain."""

    model_config = {"frozen": True}

    n: int
    psi1_norm: float
    psi2_norm: float
    psi_norm2: float
    psi_norm_1to2: float
    psi_support_col_norm: float
    vartheta1: float
    vartheta2: float
    vartheta2_transpose: float
    v_norm: float
    checks: List[BoundCheck]

    @property
    def asserted_ok(self) -> bool:
        """All links that hold for every input are satisfied."""
        return all(c.satisfied for c in self.checks if c.applicable and c.asserted)


class DiagScalingReport(BaseModel):
    """||diag(v) A||_2 against column- and row-norm bounds."""

    model_config = {"frozen": True}

    lhs: float
    column_bound: float
    row_bound: float
    column_form_holds: bool
    row_form_holds: bool
