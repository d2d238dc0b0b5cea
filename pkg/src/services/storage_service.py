"""Storage service: CSV and JSON persistence of matrices, series and reports."""

import json
import logging
from pathlib import Path
from typing import Any, Iterable, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from ..core.exceptions import InvalidInputError
from ..models.estimator import Estimate
from ..models.observation import MaskedSeries
from ..models.spectral import BoundReport
from ..models.var import Trajectory, TransitionMatrix


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
FLOAT_FORMAT = "%.17g"


class StorageService:
    """Service reading and writing artifacts under an output directory."""

    def __init__(self, root: PathLike = "."):
        """Initialize storage service.

        Args:
            root: Directory that relative paths resolve against
        """
        self.root = Path(root)
        self.logger = logging.getLogger(self.__class__.__name__)

    def _path(self, path: PathLike) -> Path:
        target = Path(path)
        if not target.is_absolute():
            target = self.root / target
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    def write_matrix_csv(self, matrix: np.ndarray, path: PathLike) -> Path:
        """Write a matrix as headerless row-major CSV."""
        target = self._path(path)
        pd.DataFrame(np.atleast_2d(np.asarray(matrix, dtype=float))).to_csv(
            target, header=False, index=False, float_format=FLOAT_FORMAT
        )
        return target

    def read_matrix_csv(self, path: PathLike) -> np.ndarray:
        """Read a headerless CSV matrix."""
        target = Path(path)
        if not target.exists():
            raise InvalidInputError(f"matrix file not found: {target}")
        frame = pd.read_csv(target, header=None, dtype=float, float_precision="round_trip")
        return frame.to_numpy()

    def write_json(self, payload: Any, path: PathLike) -> Path:
        """Write a model or plain mapping as indented JSON."""
        target = self._path(path)
        if isinstance(payload, BaseModel):
            text = payload.model_dump_json(indent=2)
        else:
            text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default)
        target.write_text(text + "\n", encoding="utf-8")
        return target

    def read_json(self, path: PathLike) -> Any:
        """Read a JSON document."""
        target = Path(path)
        if not target.exists():
            raise InvalidInputError(f"JSON file not found: {target}")
        return json.loads(target.read_text(encoding="utf-8"))

    def write_table(self, rows: Iterable[Union[BaseModel, dict]], path: PathLike) -> Path:
        """Write records (models or dicts) as a CSV table with a header."""
        records = [r.model_dump(mode="json") if isinstance(r, BaseModel) else dict(r) for r in rows]
        target = self._path(path)
        pd.DataFrame.from_records(records).to_csv(target, index=False, float_format=FLOAT_FORMAT)
        return target

    def write_frame(self, frame: pd.DataFrame, path: PathLike) -> Path:
        """Write a DataFrame with exact float formatting."""
        target = self._path(path)
        frame.to_csv(target, index=False, float_format=FLOAT_FORMAT)
        return target

    def save_transition(self, matrix: TransitionMatrix, stem: PathLike) -> Path:
        """Matrix CSV plus JSON descriptor; returns the CSV path."""
        csv_path = self.write_matrix_csv(matrix.entries, f"{stem}.csv")
        self.write_json(matrix.descriptor(), f"{stem}.json")
        return csv_path

    def load_transition(self, path: PathLike) -> TransitionMatrix:
        """Load a matrix from a headerless CSV or a JSON descriptor."""
        target = Path(path)
        if target.suffix == ".json":
            descriptor = self.read_json(target)
            return TransitionMatrix(
                entries=descriptor["entries"],
                pattern=descriptor.get("pattern", "custom"),
                seed=descriptor.get("seed"),
                target_rho=descriptor.get("target_rho"),
                rho_is_entry_magnitude=descriptor.get("rho_is_entry_magnitude", False),
            )
        return TransitionMatrix(entries=self.read_matrix_csv(target))

    def save_trajectory(self, trajectory: Trajectory, path: PathLike) -> Path:
        """Trajectory as a p x (n+1) CSV."""
        return self.write_matrix_csv(trajectory.W, path)

    def save_masked_series(self, series: MaskedSeries, stem: PathLike) -> Path:
        """Values CSV, mask CSV and JSON sidecar; returns the values path."""
        values = self.write_matrix_csv(series.W_bar, f"{stem}.values.csv")
        pd.DataFrame(series.mask.astype(int)).to_csv(
            self._path(f"{stem}.mask.csv"), header=False, index=False
        )
        self.write_json(series.sidecar(), f"{stem}.json")
        return values

    def load_masked_series(self, stem: PathLike) -> MaskedSeries:
        """Inverse of ``save_masked_series``."""
        sidecar = self.read_json(f"{stem}.json")
        values = self.read_matrix_csv(f"{stem}.values.csv")
        mask = self.read_matrix_csv(f"{stem}.mask.csv").astype(bool)
        return MaskedSeries(W_bar=values, mask=mask, delta=sidecar["delta"], seed=sidecar["seed"])

    def save_estimate(self, estimate: Estimate, stem: PathLike) -> Path:
        """B-hat CSV plus JSON metadata; returns the CSV path."""
        csv_path = self.write_matrix_csv(estimate.B_hat, f"{stem}.csv")
        self.write_json(estimate.metadata(), f"{stem}.json")
        return csv_path

    def save_bound_report(self, report: BoundReport, path: PathLike) -> Path:
        """Bound checks as CSV rows (bound, lhs, rhs, satisfied, applicable)."""
        rows = [
            {
                "bound": c.name,
                "lhs": c.lhs,
                "rhs": c.rhs,
                "satisfied": c.satisfied,
                "applicable": c.applicable,
            }
            for c in report.checks
        ]
        return self.write_table(rows, path)


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    raise TypeError(f"not JSON serializable: {type(value).__name__}")
