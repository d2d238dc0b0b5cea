"""Pydantic models for VAR(1) processes."""

from enum import Enum
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from ..core.linalg import nnz
from .arrays import ARRAY_MODEL_CONFIG, FloatArray


class Pattern(str, Enum):
    """Support pattern of a generated transition matrix."""

    IN_STAR = "in_star"
    OUT_STAR = "out_star"
    CHAIN = "chain"
    RANDOM_SPARSE = "random_sparse"
    DIAGONAL = "diagonal"
    CUSTOM = "custom"


class InnovationFamily(str, Enum):
    """Innovation distribution family."""

    GAUSSIAN = "gaussian"
    BOUNDED_UNIFORM = "bounded_uniform"
    RADEMACHER_SCALED = "rademacher_scaled"


class TransitionMatrix(BaseModel):
    """Dense p x p transition matrix with sparsity metadata."""

    model_config = ARRAY_MODEL_CONFIG

    entries: FloatArray
    pattern: Pattern = Field(default=Pattern.CUSTOM)
    seed: Optional[int] = Field(None, ge=0)
    target_rho: Optional[float] = Field(None, gt=0, lt=1)
    rho_is_entry_magnitude: bool = Field(
        default=False,
        description="True for nilpotent patterns where target_rho set the entry magnitude",
    )

    @field_validator("entries")
    @classmethod
    def validate_entries(cls, v: np.ndarray) -> np.ndarray:
        """Require a finite square matrix."""
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 1:
            raise ValueError(f"entries must be a non-empty square matrix, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("entries must be finite")
        return v

    @property
    def p(self) -> int:
        """Dimension."""
        return int(self.entries.shape[0])

    @property
    def k(self) -> int:
        """Number of nonzero entries."""
        return nnz(self.entries)

    def descriptor(self) -> dict:
        """JSON descriptor {p, k, pattern, seed, entries}."""
        return {
            "p": self.p,
            "k": self.k,
            "pattern": self.pattern.value,
            "seed": self.seed,
            "target_rho": self.target_rho,
            "rho_is_entry_magnitude": self.rho_is_entry_magnitude,
            "entries": self.entries.tolist(),
        }


def default_ccp_constant(family: InnovationFamily, covariance: np.ndarray) -> float:
    """Family default for the convex concentration constant c_eps.

    Gaussian: sqrt(2 ||Sigma||_2). Bounded families: a bound on the support
    diameter of eps = L z, with z uniform on a cube (or its vertices).
    """
    norm2 = float(np.linalg.eigvalsh(covariance)[-1])
    if family == InnovationFamily.GAUSSIAN:
        return float(np.sqrt(2.0 * norm2))
    half_width = np.sqrt(3.0) if family == InnovationFamily.BOUNDED_UNIFORM else 1.0
    p = covariance.shape[0]
    return float(2.0 * half_width * np.sqrt(p) * np.sqrt(norm2))


class InnovationSpec(BaseModel):
    """Innovation distribution with the convex concentration constant c_eps."""

    model_config = ARRAY_MODEL_CONFIG

    family: InnovationFamily = Field(default=InnovationFamily.GAUSSIAN)
    covariance: FloatArray
    ccp_constant: Optional[float] = Field(None, gt=0)

    @model_validator(mode="before")
    @classmethod
    def fill_ccp_constant(cls, data: Any) -> Any:
        """Use the family default when no constant is given."""
        if not isinstance(data, dict) or data.get("ccp_constant") is not None:
            return data
        try:
            family = InnovationFamily(data.get("family", InnovationFamily.GAUSSIAN))
            covariance = np.asarray(data["covariance"], dtype=float)
            constant = default_ccp_constant(family, covariance)
        except (KeyError, ValueError, np.linalg.LinAlgError):
            return data
        return {**data, "ccp_constant": constant}

    @field_validator("covariance")
    @classmethod
    def validate_covariance(cls, v: np.ndarray) -> np.ndarray:
        """Require a symmetric positive-definite covariance."""
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 1:
            raise ValueError(f"covariance must be square, got shape {v.shape}")
        if not np.allclose(v, v.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.max(np.abs(v))))):
            raise ValueError("covariance must be symmetric")
        if np.min(np.linalg.eigvalsh(v)) <= 0:
            raise ValueError("covariance must be positive definite")
        return v

    @model_validator(mode="after")
    def check_ccp_constant(self) -> "InnovationSpec":
        """2 c_eps^2 >= ||Sigma||_2 must hold for any valid constant."""
        if self.ccp_constant is None:
            raise ValueError("ccp_constant could not be determined")
        if 2.0 * self.ccp_constant**2 < self.covariance_norm * (1.0 - 1e-12):
            raise ValueError(
                f"ccp_constant {self.ccp_constant} violates 2*c^2 >= ||Sigma||_2 "
                f"= {self.covariance_norm}"
            )
        return self

    @property
    def p(self) -> int:
        """Dimension."""
        return int(self.covariance.shape[0])

    @property
    def covariance_norm(self) -> float:
        """||Sigma||_2."""
        return float(np.linalg.eigvalsh(self.covariance)[-1])

    @property
    def inverse_covariance_norm(self) -> float:
        """||Sigma^{-1}||_2."""
        return float(1.0 / np.linalg.eigvalsh(self.covariance)[0])

    @property
    def cholesky(self) -> np.ndarray:
        """Lower Cholesky factor of the covariance."""
        return np.linalg.cholesky(self.covariance)

    @property
    def bounded(self) -> bool:
        """Whether the family has bounded support."""
        return self.family != InnovationFamily.GAUSSIAN


class Trajectory(BaseModel):
    """Simulated trajectory W = [w_0 ... w_n] with the innovations that built it."""

    model_config = ARRAY_MODEL_CONFIG

    W: FloatArray
    innovations: FloatArray
    seed: int = Field(..., ge=0)
    burn_in: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def validate_shapes(self) -> "Trajectory":
        """W is p x (n+1) and the innovations p x n."""
        if self.W.ndim != 2 or self.W.shape[1] < 2:
            raise ValueError(f"W must be p x (n+1) with n >= 1, got {self.W.shape}")
        if self.innovations.shape != (self.W.shape[0], self.W.shape[1] - 1):
            raise ValueError(
                f"innovations shape {self.innovations.shape} does not match W {self.W.shape}"
            )
        return self

    @property
    def p(self) -> int:
        """Dimension."""
        return int(self.W.shape[0])

    @property
    def n(self) -> int:
        """Horizon."""
        return int(self.W.shape[1] - 1)

    @property
    def X(self) -> np.ndarray:
        """Columns 0..n-1."""
        return self.W[:, :-1]

    @property
    def Y(self) -> np.ndarray:
        """Columns 1..n."""
        return self.W[:, 1:]
