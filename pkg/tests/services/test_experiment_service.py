"""Tests for experiment service."""

import asyncio

import pandas as pd
import pytest

from src.core.exceptions import InvalidInputError
from src.models.experiment import ExperimentConfig, GridSpec, LambdaRule, LambdaRuleKind
from src.models.var import Pattern
from src.services.experiment_service import ExperimentService, load_experiment_config


@pytest.fixture
def small_config():
    """Two-cell sweep with two replications."""
    return ExperimentConfig(
        scenario="smoke",
        grid=GridSpec(p=[4], k=[5], n=[150], delta=[0.0, 0.2]),
        lambda_rule=LambdaRule(kind=LambdaRuleKind.SQRT_LOG, c=0.5),
        replications=2,
        master_seed=11,
        solver={"max_iters": 2000, "tol": 1e-8},
    )


CONFIG_TOML = """
scenario = "from-file"
replications = 3
master_seed = 5

[grid]
p = [4]
k = [3]
n = [100, 200]
delta = [0.1]
pattern = ["chain"]

[lambda_rule]
kind = "fixed"
value = 0.05
"""


class TestExperimentService:
    """Test experiment sweeps."""

    @pytest.mark.asyncio
    async def test_should_write_result_files_when_sweep_runs(self, tmp_path, small_config):
        """Test artifacts and row layout."""
        # Arrange
        service = ExperimentService(threads=2)

        # Act
        paths = await service.run_experiment(small_config, tmp_path)

        # Assert
        assert {"results", "summary", "timings", "config"} <= set(paths)
        results = pd.read_csv(paths["results"])
        assert len(results) == 2 * 2 * 2
        assert set(results["variant"]) == {"regularized_ball", "constrained"}
        assert (results["status"] == "ok").all()
        assert not results.duplicated(["cell", "rep", "variant"]).any()
        assert list(results["cell"]) == sorted(results["cell"])
        summary = pd.read_csv(paths["summary"])
        assert set(summary["replications"]) == {2}
        assert "error_F_median" in summary.columns

    @pytest.mark.asyncio
    async def test_should_produce_identical_results_when_thread_count_changes(
        self, tmp_path, small_config
    ):
        """Test byte-identical results across thread counts."""
        # Act
        single, pooled = await asyncio.gather(
            ExperimentService(threads=1).run_experiment(small_config, tmp_path / "one"),
            ExperimentService(threads=3).run_experiment(small_config, tmp_path / "three"),
        )

        # Assert
        assert single["results"].read_bytes() == pooled["results"].read_bytes()

    @pytest.mark.asyncio
    async def test_should_record_failures_when_cell_is_infeasible(self, tmp_path):
        """Test failed rows for a pattern that forces another k."""
        # Arrange
        config = ExperimentConfig(
            scenario="bad",
            grid=GridSpec(p=[4], k=[2], n=[50], pattern=[Pattern.CHAIN]),
        )

        # Act
        paths = await ExperimentService(threads=1).run_experiment(config, tmp_path)

        # Assert
        results = pd.read_csv(paths["results"])
        assert len(results) == 2
        assert (results["status"] == "failed").all()
        assert results["failure_reason"].str.contains("implies k=3").all()

    @pytest.mark.asyncio
    async def test_should_emit_plots_when_enabled(self, tmp_path, small_config):
        """Test plot emission at the end of a sweep."""
        # Arrange
        config = small_config.model_copy(update={"emit_plots": True})

        # Act
        paths = await ExperimentService(threads=1).run_experiment(config, tmp_path)

        # Assert
        assert (tmp_path / "plots" / "error_vs_n.png").exists()
        assert paths["support_vs_n"].exists()

    def test_should_summarize_empty_rows_when_all_failed(self):
        """Test the summary of an empty row list."""
        # Act
        summary = ExperimentService(threads=1).summarize([])

        # Assert
        assert summary.empty
        assert "replications" in summary.columns


class TestLoadExperimentConfig:
    """Test config loading."""

    def test_should_parse_toml_when_file_exists(self, tmp_path):
        """Test TOML parsing with defaults for omitted fields."""
        # Arrange
        path = tmp_path / "exp.toml"
        path.write_text(CONFIG_TOML)

        # Act
        config = load_experiment_config(path)

        # Assert
        assert config.scenario == "from-file"
        assert config.grid.pattern == [Pattern.CHAIN]
        assert config.lambda_rule.kind == LambdaRuleKind.FIXED
        assert len(config.grid.cells()) == 2
        assert config.solver.max_iters == 5000

    def test_should_apply_overrides_when_given(self, tmp_path):
        """Test CLI-style overrides."""
        # Arrange
        path = tmp_path / "exp.toml"
        path.write_text(CONFIG_TOML)

        # Act
        config = load_experiment_config(path, master_seed=99, output_dir=None)

        # Assert
        assert config.master_seed == 99
        assert config.output_dir == "results"

    def test_should_raise_error_when_file_is_missing(self, tmp_path):
        """Test missing config."""
        # Act & Assert
        with pytest.raises(InvalidInputError):
            load_experiment_config(tmp_path / "absent.toml")

    def test_should_raise_error_when_file_is_malformed(self, tmp_path):
        """Test unparsable config."""
        # Arrange
        path = tmp_path / "bad.toml"
        path.write_text("scenario = [unclosed")

        # Act & Assert
        with pytest.raises(InvalidInputError):
            load_experiment_config(path)
