"""Pydantic models for the partially observed process and its moments."""

from enum import Enum

import numpy as np
from pydantic import BaseModel, Field, model_validator

from .arrays import ARRAY_MODEL_CONFIG, BoolArray, FloatArray


class Scaling(str, Enum):
    """Convention of the corrected moments.

    ``raw`` keeps Q = (1/n)(Xbar Xbar' - delta diag(Xbar Xbar')); ``unbiased`` divides
    by the mask covariance so that E[Q] = Gamma_w(0). The two differ by (1-delta)^2.
    """

    RAW = "raw"
    UNBIASED = "unbiased"


class MaskedSeries(BaseModel):
    """Observed matrix Wbar = W * mask with its Bernoulli mask."""

    model_config = ARRAY_MODEL_CONFIG

    W_bar: FloatArray
    mask: BoolArray
    delta: float = Field(..., ge=0, lt=1)
    seed: int = Field(..., ge=0)

    @model_validator(mode="after")
    def validate_mask(self) -> "MaskedSeries":
        """Mask and values share a shape and unobserved values are zero."""
        if self.W_bar.ndim != 2 or self.W_bar.shape[1] < 2:
            raise ValueError(f"W_bar must be p x (n+1) with n >= 1, got {self.W_bar.shape}")
        if self.mask.shape != self.W_bar.shape:
            raise ValueError(f"mask shape {self.mask.shape} != W_bar shape {self.W_bar.shape}")
        if np.any(self.W_bar[~self.mask] != 0):
            raise ValueError("W_bar must be zero wherever the mask is zero")
        return self

    @property
    def p(self) -> int:
        """Dimension."""
        return int(self.W_bar.shape[0])

    @property
    def n(self) -> int:
        """Horizon."""
        return int(self.W_bar.shape[1] - 1)

    @property
    def X_bar(self) -> np.ndarray:
        """Observed columns 0..n-1."""
        return self.W_bar[:, :-1]

    @property
    def Y_bar(self) -> np.ndarray:
        """Observed columns 1..n."""
        return self.W_bar[:, 1:]

    @property
    def observed_fraction(self) -> float:
        """Fraction of observed entries."""
        return float(np.mean(self.mask))

    def sidecar(self) -> dict:
        """JSON sidecar {delta, seed, n, p}."""
        return {"delta": self.delta, "seed": self.seed, "n": self.n, "p": self.p}


class Moments(BaseModel):
    """Corrected sample statistics Q, L and Dbar."""

    model_config = ARRAY_MODEL_CONFIG

    Q: FloatArray
    L: FloatArray
    D_bar: FloatArray
    delta: float = Field(..., ge=0, lt=1)
    scaling: Scaling = Field(default=Scaling.UNBIASED)
    n: int = Field(..., ge=1)

    @model_validator(mode="after")
    def validate_shapes(self) -> "Moments":
        """Q, L and Dbar are p x p."""
        shape = self.Q.shape
        if len(shape) != 2 or shape[0] != shape[1]:
            raise ValueError(f"Q must be square, got {shape}")
        if self.L.shape != shape or self.D_bar.shape != shape:
            raise ValueError("Q, L and D_bar must share one p x p shape")
        return self

    @property
    def p(self) -> int:
        """Dimension."""
        return int(self.Q.shape[0])

    @property
    def penalty_factor(self) -> float:
        """Multiplier turning an unbiased-convention lambda into this scaling."""
        return (1.0 - self.delta) ** 2 if self.scaling == Scaling.RAW else 1.0
