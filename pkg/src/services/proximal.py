"""Proximal operators of the l1 penalty and the l1 ball."""

import numpy as np
from numpy.typing import ArrayLike

from ..core.exceptions import InvalidInputError


def soft_threshold(x: ArrayLike, tau: float) -> np.ndarray:
    """Entrywise sign(x) * max(|x| - tau, 0).

    Args:
        x: Array of any shape
        tau: Non-negative threshold

    Returns:
        Thresholded array with the shape of ``x``
    """
    if tau < 0:
        raise InvalidInputError(f"threshold must be non-negative, got {tau}")
    arr = np.asarray(x, dtype=float)
    return np.sign(arr) * np.maximum(np.abs(arr) - tau, 0.0)


def l1_ball_threshold(x: ArrayLike, r: float) -> float:
    """Threshold tau with ||soft_threshold(x, tau)||_1 = r, or 0 if x is inside the ball.

    The root is located on the sorted magnitudes: with u sorted in decreasing
    order and c its cumulative sum, tau = (c_j - r) / j for the largest j with
    u_j > (c_j - r) / j.
    """
    u = np.sort(np.abs(np.asarray(x, dtype=float)).ravel())[::-1]
    if u.sum() <= r:
        return 0.0
    c = np.cumsum(u)
    j = np.arange(1, u.size + 1)
    active = np.flatnonzero(u - (c - r) / j > 0)
    rho = int(active[-1]) + 1
    return float(max((c[rho - 1] - r) / rho, 0.0))


def project_l1_ball(x: ArrayLike, r: float) -> np.ndarray:
    """Euclidean projection onto {y : ||y||_1 <= r}.

    Args:
        x: Array of any shape (matrices are projected as vectors)
        r: Radius; 0 projects to zero and inf returns x

    Returns:
        Projected array

    Raises:
        InvalidInputError: If r is negative
    """
    if r < 0:
        raise InvalidInputError(f"radius must be non-negative, got {r}")
    arr = np.asarray(x, dtype=float)
    if r == 0:
        return np.zeros_like(arr)
    if not np.isfinite(r) or np.sum(np.abs(arr)) <= r:
        return arr.copy()
    return soft_threshold(arr, l1_ball_threshold(arr, r))


def prox_step(x: ArrayLike, step_lambda: float, r: float) -> np.ndarray:
    """Prox of step*lambda*||.||_1 plus the indicator of the l1 ball of radius r.

    Both maps are separable in magnitude and preserve signs and magnitude order,
    so soft thresholding followed by projection solves the joint problem.
    """
    return project_l1_ball(soft_threshold(x, step_lambda), r)
