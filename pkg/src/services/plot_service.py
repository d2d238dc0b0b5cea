"""Plot service: static error-scaling figures with companion CSV files."""

import logging
from pathlib import Path
from typing import List, Optional, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from ..core.exceptions import InvalidInputError  # noqa: E402
from .storage_service import StorageService  # noqa: E402


logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("variant", "n", "delta", "status", "error_F", "precision", "recall")


def loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    """Least-squares slope of log(y) against log(x); NaN with fewer than two points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0)
    if np.unique(x[keep]).size < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


class PlotService:
    """Service drawing error and support-recovery curves from results.csv."""

    def __init__(self, dpi: int = 120):
        """Initialize plot service.

        Args:
            dpi: Resolution of the PNG files
        """
        self.dpi = dpi
        self.logger = logging.getLogger(self.__class__.__name__)

    def load_results(self, results_path: Union[str, Path]) -> pd.DataFrame:
        """Read and validate a results table.

        Raises:
            InvalidInputError: If the file is missing, empty or lacks columns
        """
        path = Path(results_path)
        if not path.exists():
            raise InvalidInputError(f"results file not found: {path}")
        try:
            frame = pd.read_csv(path)
        except pd.errors.EmptyDataError:
            raise InvalidInputError("no rows")
        if frame.empty:
            raise InvalidInputError("no rows")
        missing = [c for c in REQUIRED_COLUMNS if c not in frame.columns]
        if missing:
            raise InvalidInputError(f"results are missing columns: {', '.join(missing)}")
        frame = frame[frame["status"] == "ok"]
        if frame.empty:
            raise InvalidInputError("no rows")
        return frame

    def emit_plots(
        self,
        results_path: Union[str, Path],
        out_dir: Optional[Union[str, Path]] = None,
    ) -> List[Path]:
        """Write error-vs-n, error-vs-delta and support-vs-n figures.

        Each PNG gets a CSV with the plotted medians next to it; the log-log
        slopes annotated on the error-vs-n figure are stored in its CSV.

        Args:
            results_path: results.csv from an experiment
            out_dir: Target directory; defaults to the results directory

        Returns:
            Paths of the written images
        """
        frame = self.load_results(results_path)
        out = Path(out_dir) if out_dir is not None else Path(results_path).parent
        storage = StorageService(out)
        images = [
            self._error_vs_n(frame, storage, out / "error_vs_n.png"),
            self._error_vs_delta(frame, storage, out / "error_vs_delta.png"),
            self._support_vs_n(frame, storage, out / "support_vs_n.png"),
        ]
        self.logger.info(f"Wrote {len(images)} plots to {out}")
        return images

    def _save(self, fig: plt.Figure, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.tight_layout()
        fig.savefig(path, dpi=self.dpi)
        plt.close(fig)
        return path

    def _error_vs_n(self, frame: pd.DataFrame, storage: StorageService, path: Path) -> Path:
        medians = (
            frame.groupby(["variant", "delta", "n"], sort=True)["error_F"].median().reset_index()
        )
        medians = medians.rename(columns={"error_F": "median_error_F"})
        slopes = {
            key: loglog_slope(group["n"], group["median_error_F"])
            for key, group in medians.groupby(["variant", "delta"], sort=True)
        }
        medians["slope"] = [slopes[(v, d)] for v, d in zip(medians["variant"], medians["delta"])]
        storage.write_frame(medians, path.with_suffix(".csv"))

        fig, ax = plt.subplots(figsize=(7, 5))
        for (variant, delta), group in medians.groupby(["variant", "delta"], sort=True):
            ax.plot(
                group["n"],
                group["median_error_F"],
                marker="o",
                label=f"{variant}, delta={delta:g}, slope={slopes[(variant, delta)]:.3f}",
            )
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("n")
        ax.set_ylabel("median ||B_hat - B0||_F")
        ax.set_title("Estimation error vs sample size")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=8)
        return self._save(fig, path)

    def _error_vs_delta(self, frame: pd.DataFrame, storage: StorageService, path: Path) -> Path:
        medians = (
            frame.groupby(["variant", "n", "delta"], sort=True)["error_F"].median().reset_index()
        )
        medians = medians.rename(columns={"error_F": "median_error_F"})
        storage.write_frame(medians, path.with_suffix(".csv"))

        fig, ax = plt.subplots(figsize=(7, 5))
        for (variant, n), group in medians.groupby(["variant", "n"], sort=True):
            ax.plot(group["delta"], group["median_error_F"], marker="o", label=f"{variant}, n={n}")
        ax.set_xlabel("delta")
        ax.set_ylabel("median ||B_hat - B0||_F")
        ax.set_title("Estimation error vs missing rate")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
        return self._save(fig, path)

    def _support_vs_n(self, frame: pd.DataFrame, storage: StorageService, path: Path) -> Path:
        medians = (
            frame.groupby(["variant", "delta", "n"], sort=True)[["precision", "recall"]]
            .median()
            .reset_index()
        )
        storage.write_frame(medians, path.with_suffix(".csv"))

        fig, ax = plt.subplots(figsize=(7, 5))
        for (variant, delta), group in medians.groupby(["variant", "delta"], sort=True):
            ax.plot(
                group["n"],
                group["precision"],
                marker="o",
                label=f"precision {variant}, delta={delta:g}",
            )
            ax.plot(
                group["n"],
                group["recall"],
                marker="s",
                linestyle="--",
                label=f"recall {variant}, delta={delta:g}",
            )
        ax.set_xscale("log")
        ax.set_ylim(-0.05, 1.05)
        ax.set_xlabel("n")
        ax.set_ylabel("median support recovery")
        ax.set_title("Support recovery after thresholding")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=7)
        return self._save(fig, path)
