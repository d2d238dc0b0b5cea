"""Typer application for simulation, estimation, diagnostics and experiments."""

import asyncio
import logging
import sys
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Iterator, List, Optional

import numpy as np
import pandas as pd
import typer
from rich.console import Console
from rich.table import Table

from ..core.config import get_settings
from ..core.exceptions import InvalidInputError, NumericalFailure, UnstableTransitionError
from ..core.logging import configure_logging
from ..core.seeding import Stream, derive_rng
from ..models.estimator import EstimatorConfig, EstimatorVariant, StepRule
from ..models.observation import Scaling
from ..models.theory import Constants, RESampler
from ..models.var import InnovationFamily, InnovationSpec, Pattern
from ..services.estimator_service import EstimatorService
from ..services.experiment_service import ExperimentService, load_experiment_config
from ..services.observation_service import ObservationService
from ..services.plot_service import PlotService
from ..services.spectral_service import SpectralService
from ..services.storage_service import StorageService
from ..services.theory_service import TheoryService
from ..services.var_service import VarProcessService


logger = logging.getLogger(__name__)

EXIT_USAGE = 1
EXIT_NUMERICAL = 2

app = typer.Typer(
    name="sparsevar",
    help="Sparse VAR(1) estimation from randomly missing observations.",
    no_args_is_help=True,
    add_completion=False,
)
console = Console()

# click.exceptions as bundled with the installed typer
click_exceptions = sys.modules[typer.BadParameter.__module__]


class OutputFormat(str, Enum):
    """Encoding of report files."""

    CSV = "csv"
    JSON = "json"


@contextmanager
def guard() -> Iterator[None]:
    """Map package errors to the documented exit codes."""
    try:
        yield
    except (NumericalFailure, UnstableTransitionError) as exc:
        console.print(f"[red]numerical failure:[/red] {exc}")
        raise typer.Exit(EXIT_NUMERICAL)
    except (InvalidInputError, ValueError) as exc:
        console.print(f"[red]invalid input:[/red] {exc}")
        raise typer.Exit(EXIT_USAGE)


def _out_dir(out: Optional[Path]) -> Path:
    return Path(out or get_settings().OUTPUT_DIR)


def _seed(seed: Optional[int]) -> int:
    return get_settings().DEFAULT_SEED if seed is None else seed


def _write_report(storage: StorageService, name: str, payload: dict, fmt: OutputFormat) -> Path:
    if fmt == OutputFormat.JSON:
        return storage.write_json(payload, f"{name}.json")
    return storage.write_table([payload], f"{name}.csv")


def _print_mapping(title: str, payload: dict) -> None:
    table = Table(title=title)
    table.add_column("quantity")
    table.add_column("value", justify="right")
    for key, value in payload.items():
        table.add_row(key, f"{value:.6g}" if isinstance(value, float) else str(value))
    console.print(table)


def _show_version(value: bool) -> None:
    if value:
        settings = get_settings()
        console.print(f"{settings.APP_NAME} {settings.VERSION}")
        raise typer.Exit()


@app.callback()
def root(
    version: bool = typer.Option(
        False, "--version", callback=_show_version, is_eager=True, help="Show version and exit"
    ),
) -> None:
    """Sparse VAR(1) estimation from randomly missing observations."""


@app.command()
def simulate(
    pattern: Pattern = typer.Option(Pattern.RANDOM_SPARSE, help="Support pattern of B0"),
    p: int = typer.Option(10, min=1, help="Dimension"),
    k: Optional[int] = typer.Option(None, help="Nonzero count (implied for structured patterns)"),
    target_rho: float = typer.Option(0.5, help="Spectral radius, or entry magnitude if nilpotent"),
    n: int = typer.Option(1000, min=1, help="Horizon"),
    delta: float = typer.Option(0.0, help="Missing probability in [0, 1)"),
    family: InnovationFamily = typer.Option(InnovationFamily.GAUSSIAN, help="Innovation family"),
    burn_in: int = typer.Option(0, min=0, help="Discarded transitions before w_0"),
    seed: Optional[int] = typer.Option(None, help="Seed"),
    out: Optional[Path] = typer.Option(None, help="Output directory"),
) -> None:
    """Generate B0, simulate a trajectory and apply the Bernoulli mask."""
    with guard():
        var_service = VarProcessService()
        observation_service = ObservationService(var_service)
        storage = StorageService(_out_dir(out))
        seed = _seed(seed)
        k = k if k is not None else (var_service.implied_k(pattern, p) or p)

        B0 = var_service.generate_sparse_transition(pattern, p, k, target_rho, seed)
        spec = InnovationSpec(family=family, covariance=np.eye(p))
        trajectory = var_service.simulate(B0, spec, n, seed, burn_in=burn_in)
        series = observation_service.apply_bernoulli_mask(trajectory, delta, seed)

        storage.save_transition(B0, "transition")
        storage.save_trajectory(trajectory, "trajectory.csv")
        storage.save_masked_series(series, "series")
        console.print(
            f"Simulated p={p} k={B0.k} n={n} delta={delta}: "
            f"observed fraction {series.observed_fraction:.4f} -> {storage.root}"
        )


@app.command()
def estimate(
    series: Path = typer.Argument(..., help="Masked series stem written by 'simulate'"),
    variant: EstimatorVariant = typer.Option(EstimatorVariant.REGULARIZED_BALL),
    lambda_n: float = typer.Option(0.1, "--lambda", min=0.0, help="Regularization weight"),
    b0: Optional[float] = typer.Option(None, help="Frobenius radius parameter"),
    k_hint: Optional[int] = typer.Option(None, help="Sparsity used in the ball radius"),
    radius: Optional[float] = typer.Option(None, help="Explicit l1 radius"),
    scaling: Scaling = typer.Option(Scaling.UNBIASED),
    step_rule: StepRule = typer.Option(StepRule.BACKTRACKING),
    max_iters: Optional[int] = typer.Option(None, min=1),
    tol: Optional[float] = typer.Option(None),
    estimate_delta: bool = typer.Option(
        False, "--estimate-delta", help="Replace the recorded delta by 1 - observed fraction"
    ),
    truth: Optional[Path] = typer.Option(None, help="True matrix for the support report"),
    out: Optional[Path] = typer.Option(None, help="Output directory"),
    fmt: OutputFormat = typer.Option(OutputFormat.CSV, "--format"),
) -> None:
    """Estimate B0 from a masked series and hard-threshold the result."""
    with guard():
        settings = get_settings()
        storage = StorageService(_out_dir(out))
        masked = storage.load_masked_series(series)
        observation_service = ObservationService()
        if estimate_delta:
            delta_hat = observation_service.estimate_delta(masked)
            logger.info(f"Plug-in delta {delta_hat:.6g} replaces recorded {masked.delta:.6g}")
            masked = masked.model_copy(update={"delta": delta_hat})
        moments = observation_service.build_moments(masked, scaling)
        cfg = EstimatorConfig(
            variant=variant,
            lambda_n=lambda_n,
            b0=b0,
            k_hint=k_hint,
            radius=radius,
            step_rule=step_rule,
            max_iters=max_iters or settings.SOLVER_MAX_ITERS,
            tol=tol or settings.SOLVER_TOL,
        )
        service = EstimatorService()
        result = service.solve(moments, cfg)
        B_true = storage.load_transition(truth).entries if truth else None
        thresholded = service.hard_threshold(result, lambda_n, B_true)

        if fmt == OutputFormat.JSON:
            storage.write_json(
                {**result.metadata(), "B_hat": result.B_hat.tolist()}, "estimate.json"
            )
        else:
            storage.save_estimate(result, "estimate")
        storage.write_matrix_csv(thresholded.T_tilde, "thresholded.csv")
        if thresholded.report is not None:
            _write_report(storage, "support", thresholded.report.model_dump(), fmt)
        _print_mapping("Estimate", result.metadata())


@app.command()
def diagnose(
    matrix: Path = typer.Argument(..., help="Matrix CSV or JSON descriptor"),
    grid: Optional[int] = typer.Option(None, help="Unit-circle grid points (>= 64)"),
    refine_tol: Optional[float] = typer.Option(None, help="Angular refinement tolerance"),
    out: Optional[Path] = typer.Option(None, help="Output directory"),
    fmt: OutputFormat = typer.Option(OutputFormat.JSON, "--format"),
) -> None:
    """Compute the spectral quantities and norm bounds of a matrix."""
    with guard():
        storage = StorageService(_out_dir(out))
        B = storage.load_transition(matrix)
        service = SpectralService(grid_points=grid, refine_tol=refine_tol)
        report = service.diagonalizable_bounds(B)
        payload = report.diagnostics.model_dump()
        payload["support_J"] = " ".join(str(j) for j in payload["support_J"])
        _write_report(storage, "diagnostics", payload, fmt)
        storage.save_bound_report(report, "bounds.csv")
        profiles = [service.transfer_norm_profile(B, which) for which in (0, 1, 2)]
        storage.write_frame(
            pd.DataFrame(
                {
                    "angle": profiles[0]["angle"],
                    **{f"norm{which}": frame["value"] for which, frame in enumerate(profiles)},
                }
            ),
            "profile.csv",
        )
        _print_mapping("Spectral diagnostics", report.diagnostics.model_dump(exclude={"support_J"}))
        if report.violations:
            console.print(f"[yellow]{len(report.violations)} bound(s) violated[/yellow]")


@app.command()
def certify(
    matrix: Path = typer.Argument(..., help="Matrix CSV or JSON descriptor"),
    n: int = typer.Option(..., min=2, help="Sample size"),
    delta: float = typer.Option(0.0, help="Missing probability"),
    b0: Optional[float] = typer.Option(None, help="Frobenius radius parameter (default ||B0||_F)"),
    lambda_n: Optional[float] = typer.Option(None, "--lambda", help="Regularization weight"),
    family: InnovationFamily = typer.Option(InnovationFamily.GAUSSIAN),
    ccp_constant: Optional[float] = typer.Option(None, help="Convex concentration constant"),
    c0: Optional[float] = typer.Option(None),
    c_a: Optional[float] = typer.Option(None, "--ca"),
    out: Optional[Path] = typer.Option(None, help="Output directory"),
    fmt: OutputFormat = typer.Option(OutputFormat.JSON, "--format"),
) -> None:
    """Evaluate the error-bound certificate for a matrix with identity innovations."""
    with guard():
        settings = get_settings()
        storage = StorageService(_out_dir(out))
        B = storage.load_transition(matrix)
        spec = InnovationSpec(family=family, covariance=np.eye(B.p), ccp_constant=ccp_constant)
        constants = Constants(
            c0=c0 or settings.UNIVERSAL_C0,
            c1=settings.UNIVERSAL_C1,
            c_a=c_a or settings.UNIVERSAL_CA,
        )
        b0 = b0 if b0 is not None else float(np.linalg.norm(B.entries))
        certificate = TheoryService(constants=constants).error_certificate(
            B, spec, delta, n, b0, lambda_n=lambda_n
        )
        payload = certificate.model_dump(exclude={"constants"})
        payload.update({f"constant_{k}": v for k, v in constants.model_dump().items()})
        _write_report(storage, "certificate", payload, fmt)
        _print_mapping("Certificate", payload)


@app.command()
def verify(
    matrix: Path = typer.Argument(..., help="Matrix CSV or JSON descriptor"),
    n: int = typer.Option(1000, min=2, help="Sample size"),
    delta: float = typer.Option(0.0, help="Missing probability"),
    family: InnovationFamily = typer.Option(InnovationFamily.GAUSSIAN),
    s: int = typer.Option(1, min=1, help="RE sparsity level (vectors are 2s-sparse)"),
    re_trials: int = typer.Option(1000, min=1, help="RE directions"),
    sampler: RESampler = typer.Option(RESampler.SPARSE_RANDOM),
    trials: int = typer.Option(200, help="Concentration trials"),
    t_grid: List[float] = typer.Option([0.05, 0.1, 0.2, 0.5, 1.0], "--t", help="Tail thresholds"),
    threads: Optional[int] = typer.Option(
        None, min=1, envvar="SPARSEVAR_THREADS", help="Worker threads for the concentration trials"
    ),
    seed: Optional[int] = typer.Option(None, help="Seed"),
    out: Optional[Path] = typer.Option(None, help="Output directory"),
    fmt: OutputFormat = typer.Option(OutputFormat.JSON, "--format"),
) -> None:
    """Run the RE, deviation-bound, concentration and cross-moment harnesses."""
    with guard():
        seed = _seed(seed)
        storage = StorageService(_out_dir(out))
        B = storage.load_transition(matrix)
        var_service = VarProcessService()
        observation_service = ObservationService(var_service)
        theory = TheoryService(var_service=var_service, observation_service=observation_service)
        spec = InnovationSpec(family=family, covariance=np.eye(B.p))

        trajectory = var_service.simulate(B, spec, n, seed)
        masked = observation_service.apply_bernoulli_mask(trajectory, delta, seed)
        moments = observation_service.build_moments(masked, Scaling.UNBIASED)
        gamma0 = var_service.stationary_covariance(B, spec.covariance)
        gamma1 = var_service.autocovariance(B, spec.covariance, 1)

        alpha_low = 0.5 * float(np.linalg.eigvalsh(gamma0)[0])
        re_report = theory.check_re(moments.Q, alpha_low, 0.0, sampler, re_trials, s, seed)

        rng = derive_rng(seed, Stream.CHECK)
        v = rng.standard_normal(B.p)
        v /= np.linalg.norm(v)
        tails = theory.mc_concentration(
            B,
            spec,
            delta,
            v,
            min(n, 500),
            trials,
            t_grid,
            seed=seed,
            enforce_support=False,
            threads=threads or get_settings().THREADS,
        )
        mask_bar = observation_service.mask_covariance(delta, B.p)
        u, w = rng.standard_normal(B.p), rng.standard_normal(B.p)
        residual = theory.cross_moment_identity_check(
            masked.X_bar, masked.Y_bar, gamma0 * mask_bar, gamma1 * (1 - delta) ** 2, u, w
        )

        payload = {
            **{f"re_{key}": value for key, value in re_report.model_dump(mode="json").items()},
            "deviation_stat": theory.deviation_stat(B, moments),
            "population_deviation": theory.population_deviation(B, spec.covariance),
            "concentration_median_deviation": tails.median_deviation,
            "concentration_minimal_c_a": tails.minimal_c_a,
            "concentration_support_condition_ok": tails.support_condition_ok,
            "cross_moment_residual": residual,
        }
        _write_report(storage, "verify", payload, fmt)
        storage.write_table(tails.rows, "tails.csv")
        _print_mapping("Verification", payload)


@app.command()
def experiment(
    config: Path = typer.Option(..., "--config", help="TOML or JSON experiment config"),
    seed: Optional[int] = typer.Option(None, help="Overrides master_seed"),
    out: Optional[Path] = typer.Option(None, help="Overrides output_dir"),
    threads: Optional[int] = typer.Option(
        None, min=1, envvar="SPARSEVAR_THREADS", help="Worker threads"
    ),
    fmt: OutputFormat = typer.Option(OutputFormat.JSON, "--format", help="Manifest encoding"),
) -> None:
    """Run a configured grid sweep and write its result files."""
    with guard():
        cfg = load_experiment_config(
            config, master_seed=seed, output_dir=str(out) if out else None
        )
        paths = asyncio.run(ExperimentService(threads=threads).run_experiment(cfg))
        manifest = {name: str(path) for name, path in paths.items()}
        _write_report(StorageService(cfg.output_dir), "manifest", manifest, fmt)
        _print_mapping("Artifacts", manifest)


@app.command()
def plot(
    results: Path = typer.Argument(..., help="results.csv from 'experiment'"),
    out: Optional[Path] = typer.Option(None, help="Output directory"),
    fmt: OutputFormat = typer.Option(OutputFormat.JSON, "--format", help="Manifest encoding"),
) -> None:
    """Draw error-scaling and support-recovery plots."""
    with guard():
        images = PlotService().emit_plots(results, out)
        manifest = {image.stem: str(image) for image in images}
        _write_report(StorageService(images[0].parent), "figures", manifest, fmt)
        _print_mapping("Figures", manifest)


def main() -> None:
    """Console entry point with exit codes 0 (ok), 1 (usage) and 2 (numerical)."""
    configure_logging()
    try:
        code = app(standalone_mode=False)
    except typer.Abort:
        raise SystemExit(EXIT_USAGE)
    except click_exceptions.ClickException as exc:
        exc.show()
        raise SystemExit(EXIT_USAGE)
    sys.exit(code if isinstance(code, int) else 0)


if __name__ == "__main__":
    main()
