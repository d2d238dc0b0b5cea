"""Spectral service: transfer-function norms on the unit circle and their bounds."""

import logging
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike
from scipy.optimize import minimize_scalar

from ..core.config import get_settings
from ..core.exceptions import InvalidInputError
from ..core.linalg import (
    nnz,
    norm_1_to_2,
    norm_2_to_inf,
    operator_norm_1,
    operator_norm_inf,
    spectral_norm,
)
from ..models.spectral import (
    BoundCheck,
    BoundReport,
    DiagScalingReport,
    PsiBoundReport,
    SpectralDiagnostics,
)
from .var_service import MatrixLike, VarProcessService, entries_of


logger = logging.getLogger(__name__)

MIN_GRID_POINTS = 64
BOUND_RTOL = 1e-9
BOUND_ATOL = 1e-12


def _holds(lhs: float, rhs: float, rtol: float = BOUND_RTOL, atol: float = BOUND_ATOL) -> bool:
    return bool(lhs <= rhs + rtol * abs(rhs) + atol)


class SpectralService:
    """Service computing vartheta0/1/2, theta0, kappa0 and related norm bounds."""

    def __init__(
        self,
        grid_points: Optional[int] = None,
        refine_tol: Optional[float] = None,
        cond_limit: Optional[float] = None,
        psi_size_limit: Optional[int] = None,
        var_service: Optional[VarProcessService] = None,
    ):
        """Initialize spectral service.

        Args:
            grid_points: Uniform grid size on the unit circle
            refine_tol: Angular tolerance of the local refinement
            cond_limit: Eigenvector condition number below which B counts as diagonalizable
            psi_size_limit: Largest n*p accepted by ``build_psi``
            var_service: Process service for the spectral radius
        """
        settings = get_settings()
        self.grid_points = grid_points or settings.SPECTRAL_GRID_POINTS
        self.refine_tol = refine_tol or settings.SPECTRAL_REFINE_TOL
        self.cond_limit = cond_limit or settings.DIAGONALIZABLE_COND_LIMIT
        self.psi_size_limit = psi_size_limit or settings.PSI_SIZE_LIMIT
        self.var_service = var_service or VarProcessService()
        self.logger = logging.getLogger(self.__class__.__name__)

    def support_reduce(self, B: MatrixLike) -> Tuple[np.ndarray, List[int]]:
        """Principal submatrix B[J, J] over nonzero rows and columns.

        Args:
            B: Square matrix

        Returns:
            Tuple of the submatrix and the sorted index set J
        """
        arr = entries_of(B)
        nonzero = arr != 0
        J = np.flatnonzero(nonzero.any(axis=1) | nonzero.any(axis=0))
        return arr[np.ix_(J, J)], [int(j) for j in J]

    def _norms_at(self, sub: np.ndarray, angles: np.ndarray, which: int) -> np.ndarray:
        """Named norm of I - Bz (or its inverse) at z = exp(i * angle)."""
        m = sub.shape[0]
        z = np.exp(1j * np.atleast_1d(angles))
        eye = np.eye(m, dtype=complex)
        M = eye[None, :, :] - z[:, None, None] * sub[None, :, :]
        if which == 0:
            return np.linalg.norm(M, 2, axis=(1, 2))
        # Batched LU solve with partial pivoting
        inverse = np.linalg.solve(M, np.broadcast_to(eye, M.shape))
        if which == 1:
            return np.linalg.norm(inverse, 2, axis=(1, 2))
        return np.max(np.sqrt(np.sum(np.abs(inverse) ** 2, axis=1)), axis=1)

    def _validate(self, which: int, grid: int) -> None:
        if which not in (0, 1, 2):
            raise InvalidInputError(f"which must be 0, 1 or 2, got {which}")
        if grid < MIN_GRID_POINTS:
            raise InvalidInputError(f"grid must have at least {MIN_GRID_POINTS} points, got {grid}")

    def transfer_norm_profile(
        self, B: MatrixLike, which: int, grid: Optional[int] = None
    ) -> pd.DataFrame:
        """Named transfer norm on a uniform angle grid.

        Args:
            B: Transition matrix (stable unless ``which`` is 0)
            which: 0 for ||I - Bz||_2, 1 for ||(I - Bz)^-1||_2, 2 for ||(I - Bz)^-1||_{1->2}
            grid: Number of angles in [0, 2 pi)

        Returns:
            DataFrame with ``angle`` and ``value`` columns; values are not floored at 1
        """
        grid = grid or self.grid_points
        self._validate(which, grid)
        arr = self.var_service.require_stable(B) if which else entries_of(B)
        sub, _ = self.support_reduce(arr)
        angles = 2.0 * np.pi * np.arange(grid) / grid
        values = np.ones(grid) if sub.size == 0 else self._norms_at(sub, angles, which)
        return pd.DataFrame({"angle": angles, "value": values})

    def vartheta(
        self,
        B: MatrixLike,
        which: int,
        grid: Optional[int] = None,
        refine_tol: Optional[float] = None,
    ) -> float:
        """Maximum of a transfer norm over the unit circle.

        The maximum is taken on a uniform grid and then refined by a bounded
        scalar search on the bracket around the best grid angle. Maxima are
        at least 1 since the circle average of each function's matrix is I, so
        the value does not change when B is embedded in a larger zero matrix.

        Args:
            B: Transition matrix (stable unless ``which`` is 0)
            which: 0, 1 or 2
            grid: Number of grid angles (>= 64)
            refine_tol: Angular tolerance of the refinement

        Returns:
            The maximum

        Raises:
            InvalidInputError: If the grid is too coarse or ``which`` is unknown
            UnstableTransitionError: If rho(B) >= 1 and ``which`` is 1 or 2
        """
        grid = grid or self.grid_points
        refine_tol = refine_tol or self.refine_tol
        self._validate(which, grid)
        arr = self.var_service.require_stable(B) if which else entries_of(B)
        sub, _ = self.support_reduce(arr)
        if sub.size == 0:
            return 1.0

        angles = 2.0 * np.pi * np.arange(grid) / grid
        values = self._norms_at(sub, angles, which)
        best = int(np.argmax(values))
        width = 2.0 * np.pi / grid
        result = minimize_scalar(
            lambda phi: -float(self._norms_at(sub, np.array([phi]), which)[0]),
            bounds=(angles[best] - width, angles[best] + width),
            method="bounded",
            options={"xatol": refine_tol},
        )
        return float(max(values[best], -result.fun, 1.0))

    def diagnostics(
        self,
        B: MatrixLike,
        grid: Optional[int] = None,
        refine_tol: Optional[float] = None,
    ) -> SpectralDiagnostics:
        """Compute rho, vartheta0/1/2, theta0 and kappa0 for a stable matrix."""
        grid = grid or self.grid_points
        refine_tol = refine_tol or self.refine_tol
        arr = self.var_service.require_stable(B)
        v0, v1, v2 = (self.vartheta(arr, which, grid, refine_tol) for which in (0, 1, 2))
        _, J = self.support_reduce(arr)
        return SpectralDiagnostics(
            rho=self.var_service.spectral_radius(arr),
            vartheta0=v0,
            vartheta1=v1,
            vartheta2=v2,
            theta0=v2**2 / v1**2,
            kappa0=v0**2 * v1**2,
            k=nnz(arr),
            p=arr.shape[0],
            grid_points=grid,
            refinement_tol=refine_tol,
            support_J=J,
        )

    def eigenvector_condition(self, B: MatrixLike) -> float:
        """Spectral condition number of the eigenvector matrix (inf when defective)."""
        arr = entries_of(B)
        _, R = np.linalg.eig(arr)
        with np.errstate(divide="ignore", invalid="ignore"):
            cond = float(np.linalg.cond(R))
        return cond if np.isfinite(cond) else float("inf")

    def diagonalizable_bounds(self, B: MatrixLike) -> BoundReport:
        """Evaluate the norm bounds on vartheta0/1/2, theta0 and kappa0.

        The bounds through the eigenvector matrix R apply only when B is
        diagonalizable, i.e. cond(R) is below the configured limit.

        Args:
            B: Stable transition matrix

        Returns:
            Report with one check per inequality
        """
        arr = self.var_service.require_stable(B)
        diag = self.diagnostics(arr)
        rho = diag.rho
        norm2 = spectral_norm(arr)
        half_sum = 0.5 * (operator_norm_1(arr) + operator_norm_inf(arr))
        col = norm_1_to_2(arr)
        cond = self.eigenvector_condition(arr)
        diagonalizable = bool(cond < self.cond_limit)
        kappa_R = cond if diagonalizable else float("nan")

        def check(name: str, lhs: float, rhs: float, applicable: bool = True) -> BoundCheck:
            if not applicable:
                return BoundCheck(name=name, applicable=False)
            return BoundCheck(name=name, lhs=lhs, rhs=rhs, satisfied=_holds(lhs, rhs))

        checks = [
            check("vartheta0 <= 1 + ||B||_2", diag.vartheta0, 1.0 + norm2),
            check("1 + ||B||_2 <= 1 + (||B||_1 + ||B||_inf)/2", 1.0 + norm2, 1.0 + half_sum),
            check(
                "vartheta1 <= kappa(R)/(1 - rho)",
                diag.vartheta1,
                kappa_R / (1.0 - rho),
                diagonalizable,
            ),
            check("1/(1 + ||B||_{1->2}) <= vartheta2", 1.0 / (1.0 + col), diag.vartheta2),
            check(
                "(1 - rho)/((1 + ||B||_{1->2}) kappa(R)) <= sqrt(theta0)",
                (1.0 - rho) / ((1.0 + col) * kappa_R),
                float(np.sqrt(diag.theta0)),
                diagonalizable,
            ),
            check(
                "sqrt(kappa0) <= kappa(R)/(1 - rho) (1 + (||B||_1 + ||B||_inf)/2)",
                float(np.sqrt(diag.kappa0)),
                kappa_R / (1.0 - rho) * (1.0 + half_sum),
                diagonalizable,
            ),
        ]
        report = BoundReport(
            diagnostics=diag,
            eigenvector_condition=cond,
            diagonalizable=diagonalizable,
            checks=checks,
        )
        if report.violations:
            self.logger.warning(f"{len(report.violations)} norm bound(s) violated")
        return report

    def build_psi(self, B: MatrixLike, n: int) -> np.ndarray:
        """Lower block-triangular block-Toeplitz matrix with blocks B^(i-j).

        Raises:
            InvalidInputError: If n < 1 or n * p exceeds the size guard
        """
        arr = entries_of(B)
        p = arr.shape[0]
        if n < 1:
            raise InvalidInputError(f"n must be >= 1, got {n}")
        if n * p > self.psi_size_limit:
            raise InvalidInputError(
                f"Psi_n of size n*p = {n * p} exceeds the limit {self.psi_size_limit}"
            )
        powers = [np.eye(p)]
        for _ in range(1, n):
            powers.append(powers[-1] @ arr)
        psi = np.zeros((n * p, n * p))
        for i in range(n):
            for j in range(i + 1):
                psi[i * p : (i + 1) * p, j * p : (j + 1) * p] = powers[i - j]
        return psi

    def check_psi_product_bounds(
        self,
        B: MatrixLike,
        v: ArrayLike,
        omega: ArrayLike,
        n: int,
    ) -> PsiBoundReport:
        """Brute-force the norm chain of the masked Psi_n products.

        Psi_(1) = (I_n kron v)' I_Omega Psi_n and Psi_(2) = (I_n kron diag(v)) I_Omega Psi_n.

        Args:
            B: Stable transition matrix
            v: Vector of length p
            omega: Observation indicator of length n*p
            n: Horizon

        Returns:
            Report of all evaluated links
        """
        arr = self.var_service.require_stable(B)
        p = arr.shape[0]
        v = np.asarray(v, dtype=float).reshape(-1)
        omega = np.asarray(omega, dtype=float).reshape(-1)
        if v.shape != (p,):
            raise InvalidInputError(f"v must have length p = {p}, got {v.shape}")
        if omega.shape != (n * p,):
            raise InvalidInputError(f"omega must have length n*p = {n * p}, got {omega.shape}")

        psi = self.build_psi(arr, n)
        masked = omega[:, None] * psi
        psi1 = np.kron(np.eye(n), v.reshape(-1, 1)).T @ masked
        psi2 = np.tile(v, n)[:, None] * masked
        support_rows = np.tile(v != 0, n)

        v_norm = float(np.linalg.norm(v))
        v1 = self.vartheta(arr, 1)
        v2 = self.vartheta(arr, 2)
        v2t = self.vartheta(arr.T, 2)
        psi1_norm = spectral_norm(psi1)
        psi2_norm = spectral_norm(psi2)
        psi_norm2 = spectral_norm(psi)
        psi_1to2 = norm_1_to_2(psi)
        support_col = norm_1_to_2(psi[support_rows])

        def check(name: str, lhs: float, rhs: float, asserted: bool = True) -> BoundCheck:
            return BoundCheck(
                name=name, lhs=lhs, rhs=rhs, asserted=asserted, satisfied=_holds(lhs, rhs)
            )

        checks = [
            check("||Psi_(1)||_2 <= ||v||_2 ||Psi_n||_2", psi1_norm, v_norm * psi_norm2),
            check("||Psi_n||_2 <= vartheta1(B)", psi_norm2, v1),
            check("||Psi_n||_{1->2} <= vartheta2(B)", psi_1to2, v2),
            check("||Psi_(2)||_2 <= ||v||_2 vartheta2(B')", psi2_norm, v_norm * v2t),
            check(
                "||Psi_(2)||_2 <= ||v||_2 ||I_supp Psi_n||_{1->2}",
                psi2_norm,
                v_norm * support_col,
                asserted=False,
            ),
            check("||Psi_(2)||_2 <= ||v||_2 vartheta2(B)", psi2_norm, v_norm * v2, asserted=False),
        ]
        return PsiBoundReport(
            n=n,
            psi1_norm=psi1_norm,
            psi2_norm=psi2_norm,
            psi_norm2=psi_norm2,
            psi_norm_1to2=psi_1to2,
            psi_support_col_norm=support_col,
            vartheta1=v1,
            vartheta2=v2,
            vartheta2_transpose=v2t,
            v_norm=v_norm,
            checks=checks,
        )

    def check_diag_scaling_bound(self, A: ArrayLike, v: ArrayLike) -> DiagScalingReport:
        """Compare ||diag(v) A||_2 with ||v||_2 times column and row norms of I_supp(v) A.

        The row-norm bound holds for every input; the column-norm bound can fail
        (for instance when A has a single row) and is only reported.
        """
        A = np.asarray(A, dtype=float)
        v = np.asarray(v, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape[0] != v.shape[0]:
            raise InvalidInputError(
                f"v of length {v.shape[0]} does not match A with shape {A.shape}"
            )
        lhs = spectral_norm(v[:, None] * A)
        restricted = A[v != 0]
        v_norm = float(np.linalg.norm(v))
        column_bound = v_norm * norm_1_to_2(restricted)
        row_bound = v_norm * norm_2_to_inf(restricted)
        return DiagScalingReport(
            lhs=lhs,
            column_bound=column_bound,
            row_bound=row_bound,
            column_form_holds=_holds(lhs, column_bound, rtol=1e-10, atol=1e-10),
            row_form_holds=_holds(lhs, row_bound, rtol=1e-10, atol=1e-10),
        )
