"""Matrix norms and small linear-algebra helpers used across services."""

import numpy as np
from numpy.typing import ArrayLike

from .exceptions import InvalidInputError


def as_square(B: ArrayLike, name: str = "B") -> np.ndarray:
    """Return ``B`` as a finite square float array or raise ``InvalidInputError``."""
    arr = np.asarray(B, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidInputError(f"{name} must be a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return arr


def norm_1_to_2(A: ArrayLike) -> float:
    """Largest Euclidean column norm (1->2 operator norm)."""
    arr = np.asarray(A)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.linalg.norm(arr, axis=0)))


def norm_2_to_inf(A: ArrayLike) -> float:
    """Largest Euclidean row norm (2->inf operator norm)."""
    arr = np.asarray(A)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.linalg.norm(arr, axis=1)))


def spectral_norm(A: ArrayLike) -> float:
    """Largest singular value."""
    arr = np.asarray(A)
    if arr.size == 0:
        return 0.0
    return float(np.linalg.norm(arr, 2))


def operator_norm_1(A: ArrayLike) -> float:
    """Maximum absolute column sum."""
    arr = np.asarray(A)
    return float(np.linalg.norm(arr, 1)) if arr.size else 0.0


def operator_norm_inf(A: ArrayLike) -> float:
    """Maximum absolute row sum."""
    arr = np.asarray(A)
    return float(np.linalg.norm(arr, np.inf)) if arr.size else 0.0


def vec_l1(A: ArrayLike) -> float:
    """Entrywise l1 norm of the vectorised matrix."""
    return float(np.sum(np.abs(A)))


def max_abs(A: ArrayLike) -> float:
    """Entrywise max norm."""
    arr = np.asarray(A)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def nnz(A: ArrayLike) -> int:
    """Number of entries with magnitude > 0."""
    return int(np.count_nonzero(np.abs(np.asarray(A)) > 0))


def readonly(arr: np.ndarray) -> np.ndarray:
    """Return a read-only float copy of ``arr``."""
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out
