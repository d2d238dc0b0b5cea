"""Experiment service: seeded grid sweeps over the full estimation pipeline."""

import asyncio
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..core.config import get_settings
from ..core.exceptions import InvalidInputError, SparseVarError
from ..core.linalg import vec_l1
from ..core.seeding import cell_seed
from ..models.estimator import EstimatorConfig, EstimatorVariant
from ..models.experiment import ExperimentConfig, LambdaRuleKind, ResultRow
from ..models.observation import Scaling
from ..models.var import InnovationSpec
from .estimator_service import EstimatorService
from .observation_service import ObservationService
from .plot_service import PlotService
from .spectral_service import SpectralService
from .storage_service import StorageService
from .theory_service import TheoryService
from .var_service import VarProcessService

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


logger = logging.getLogger(__name__)

VARIANTS = (EstimatorVariant.REGULARIZED_BALL, EstimatorVariant.CONSTRAINED)
SUMMARY_METRICS = ("error_F", "error_l1", "false_positives", "precision", "recall")


class ExperimentService:
    """Service running experiment configs and writing their result files."""

    def __init__(self, threads: Optional[int] = None):
        """Initialize experiment service.

        Args:
            threads: Worker threads for replications; settings default when omitted
        """
        settings = get_settings()
        self.threads = max(1, threads or settings.THREADS)
        self.var_service = VarProcessService()
        self.observation_service = ObservationService(self.var_service)
        self.spectral_service = SpectralService(var_service=self.var_service)
        self.estimator_service = EstimatorService()
        self.logger = logging.getLogger(self.__class__.__name__)

    async def run_experiment(
        self,
        config: ExperimentConfig,
        output_dir: Optional[Path] = None,
    ) -> Dict[str, Path]:
        """Run every (cell, replication) of a config and persist the results.

        Replications run in a thread pool; rows are sorted by (cell, rep,
        variant) before writing so the thread count never changes file bytes.

        Args:
            config: Experiment configuration
            output_dir: Overrides ``config.output_dir``

        Returns:
            Mapping of artifact name to written path
        """
        out = Path(output_dir or config.output_dir)
        storage = StorageService(out)
        cells = config.grid.cells()
        self.logger.info(
            f"Running scenario '{config.scenario}': {len(cells)} cells x "
            f"{config.replications} replications on {self.threads} thread(s)"
        )

        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            tasks = [
                loop.run_in_executor(executor, self._run_replication, config, index, cell, rep)
                for index, cell in enumerate(cells)
                for rep in range(config.replications)
            ]
            outcomes = await asyncio.gather(*tasks)

        rows: List[ResultRow] = [
            row for replication_rows, _ in outcomes for row in replication_rows
        ]
        rows.sort(key=lambda r: (r.cell, r.rep, r.variant))
        timings = sorted((timing for _, timing in outcomes), key=lambda t: (t["cell"], t["rep"]))

        paths = {
            "results": storage.write_table(rows, "results.csv"),
            "summary": storage.write_frame(self.summarize(rows), "summary.csv"),
            "timings": storage.write_table(timings, "timings.csv"),
            "config": storage.write_json(config, "config.resolved.json"),
        }
        if config.emit_plots:
            for image in PlotService().emit_plots(paths["results"], out / "plots"):
                paths[image.stem] = image

        failed = sum(1 for r in rows if r.status != "ok")
        self.logger.info(
            f"Scenario '{config.scenario}' finished: {len(rows)} rows, {failed} failed"
        )
        return paths

    def _run_replication(
        self,
        config: ExperimentConfig,
        cell_index: int,
        cell: dict,
        rep: int,
    ) -> Tuple[List[ResultRow], dict]:
        """Generate, simulate, mask, estimate, threshold and certify one replication."""
        started = time.perf_counter()
        seed = cell_seed(config.master_seed, cell_index, rep)
        base = {
            "scenario": config.scenario,
            "cell": cell_index,
            "rep": rep,
            "p": cell["p"],
            "k": cell["k"],
            "n": cell["n"],
            "delta": cell["delta"],
            "pattern": cell["pattern"].value,
            "family": cell["family"].value,
            "seed": str(seed),
        }
        try:
            rows = self._estimate_cell(config, cell, seed, base)
        except (SparseVarError, ValueError, np.linalg.LinAlgError) as exc:
            self.logger.error(f"Cell {cell_index} rep {rep} failed: {exc}")
            rows = [
                ResultRow(**base, variant=variant.value, status="failed", failure_reason=str(exc))
                for variant in VARIANTS
            ]
        timing = {"cell": cell_index, "rep": rep, "wall_time": time.perf_counter() - started}
        return rows, timing

    def _estimate_cell(
        self,
        config: ExperimentConfig,
        cell: dict,
        seed: int,
        base: dict,
    ) -> List[ResultRow]:
        p, k, n, delta = cell["p"], cell["k"], cell["n"], cell["delta"]
        theory = TheoryService(
            constants=config.constants,
            var_service=self.var_service,
            observation_service=self.observation_service,
            spectral_service=self.spectral_service,
        )

        B0 = self.var_service.generate_sparse_transition(
            cell["pattern"], p, k, config.target_rho, seed
        )
        spec = InnovationSpec(family=cell["family"], covariance=np.eye(p))
        trajectory = self.var_service.simulate(B0, spec, n, seed, burn_in=config.burn_in)
        series = self.observation_service.apply_bernoulli_mask(trajectory, delta, seed)
        moments = self.observation_service.build_moments(series, Scaling.UNBIASED)

        truth = np.asarray(B0.entries)
        b0 = float(np.linalg.norm(truth))
        rule = config.lambda_rule
        fixed_lambda = (
            None if rule.kind == LambdaRuleKind.THEORY else theory.lambda_from_rule(rule, p, n)
        )
        certificate = theory.error_certificate(B0, spec, delta, n, b0, lambda_n=fixed_lambda)
        lam = theory.lambda_from_rule(rule, p, n, certificate)

        rows = []
        for variant in VARIANTS:
            if variant == EstimatorVariant.REGULARIZED_BALL:
                est_cfg = EstimatorConfig(variant=variant, lambda_n=lam, b0=b0, k_hint=B0.k)
            else:
                est_cfg = EstimatorConfig(variant=variant, radius=vec_l1(truth))
            est_cfg = est_cfg.model_copy(
                update={
                    "max_iters": config.solver.max_iters,
                    "tol": config.solver.tol,
                    "step_rule": config.solver.step_rule,
                }
            )
            estimate = self.estimator_service.solve(moments, est_cfg)
            thresholded = self.estimator_service.hard_threshold(estimate, lam, truth)
            diff = np.asarray(estimate.B_hat) - truth
            report = thresholded.report
            rows.append(
                ResultRow(
                    **base,
                    variant=variant.value,
                    lambda_n=lam,
                    error_F=float(np.linalg.norm(diff)),
                    error_l1=vec_l1(diff),
                    false_positives=report.false_positives,
                    false_negatives=report.false_negatives,
                    precision=report.precision,
                    recall=report.recall,
                    iterations=estimate.iterations,
                    converged=estimate.converged,
                    **certificate.summary(),
                )
            )
        return rows

    def summarize(self, rows: List[ResultRow]) -> pd.DataFrame:
        """Per-cell median and IQR of the error metrics over successful replications."""
        keys = ["cell", "variant", "p", "k", "n", "delta", "pattern", "family"]
        frame = pd.DataFrame.from_records([r.model_dump(mode="json") for r in rows])
        if frame.empty:
            return pd.DataFrame(columns=keys + ["replications"])
        ok = frame[frame["status"] == "ok"]
        if ok.empty:
            return pd.DataFrame(columns=keys + ["replications"])

        grouped = ok.groupby(keys, sort=True)
        summary = grouped.size().rename("replications").to_frame()
        for metric in SUMMARY_METRICS:
            values = grouped[metric]
            summary[f"{metric}_median"] = values.median()
            summary[f"{metric}_iqr"] = values.quantile(0.75) - values.quantile(0.25)
        return summary.reset_index()


def load_experiment_config(path: Union[str, Path], **overrides) -> ExperimentConfig:
    """Read a TOML (or JSON) experiment config and apply top-level overrides.

    Args:
        path: Config file
        **overrides: Top-level fields replacing file values when not None

    Returns:
        Validated experiment configuration

    Raises:
        InvalidInputError: If the file is missing or cannot be parsed
    """
    target = Path(path)
    if not target.exists():
        raise InvalidInputError(f"config file not found: {target}")
    try:
        if target.suffix.lower() == ".json":
            data = json.loads(target.read_text(encoding="utf-8"))
        else:
            with target.open("rb") as handle:
                data = tomllib.load(handle)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise InvalidInputError(f"cannot parse {target}: {exc}") from exc
    data.update({key: value for key, value in overrides.items() if value is not None})
    return ExperimentConfig.model_validate(data)
