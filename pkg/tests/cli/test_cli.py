"""Tests for the command-line interface."""

import json
import logging
import sys

import numpy as np
import pandas as pd
import pytest
import typer
from typer.testing import CliRunner

from src.cli.main import EXIT_NUMERICAL, EXIT_USAGE, app, click_exceptions, main


runner = CliRunner()


@pytest.fixture
def half_identity_csv(tmp_path):
    """0.5 * I_3 written as headerless CSV."""
    path = tmp_path / "B.csv"
    np.savetxt(path, 0.5 * np.eye(3), delimiter=",")
    return path


@pytest.fixture
def unstable_csv(tmp_path):
    """Unstable matrix written as headerless CSV."""
    path = tmp_path / "unstable.csv"
    np.savetxt(path, 1.2 * np.eye(2), delimiter=",")
    return path


class TestSimulateAndEstimate:
    """Test the simulate -> estimate pipeline."""

    def test_should_write_artifacts_when_simulating(self, tmp_path):
        """Test simulate output files."""
        # Act
        result = runner.invoke(
            app,
            ["simulate", "--pattern", "chain", "--p", "4", "--n", "200",
             "--delta", "0.2", "--seed", "3", "--out", str(tmp_path)],
        )

        # Assert
        assert result.exit_code == 0, result.output
        for name in ("transition.csv", "transition.json", "trajectory.csv",
                     "series.values.csv", "series.mask.csv", "series.json"):
            assert (tmp_path / name).exists()
        sidecar = json.loads((tmp_path / "series.json").read_text())
        assert sidecar == {"delta": 0.2, "seed": 3, "n": 200, "p": 4}

    def test_should_write_estimate_when_series_exists(self, tmp_path):
        """Test estimate on a simulated series with a support report."""
        # Arrange
        runner.invoke(
            app,
            ["simulate", "--pattern", "chain", "--p", "4", "--n", "300",
             "--delta", "0.1", "--seed", "1", "--out", str(tmp_path)],
        )

        # Act
        result = runner.invoke(
            app,
            ["estimate", str(tmp_path / "series"), "--lambda", "0.05", "--radius", "3.0",
             "--truth", str(tmp_path / "transition.json"), "--out", str(tmp_path / "fit")],
        )

        # Assert
        assert result.exit_code == 0, result.output
        estimate = np.loadtxt(tmp_path / "fit" / "estimate.csv", delimiter=",")
        assert estimate.shape == (4, 4)
        assert np.sum(np.abs(estimate)) <= 3.0 + 1e-9
        assert (tmp_path / "fit" / "thresholded.csv").exists()
        support = pd.read_csv(tmp_path / "fit" / "support.csv")
        assert support.loc[0, "true_support_size"] == 3

    def test_should_use_plug_in_delta_when_estimate_delta_requested(self, tmp_path, caplog):
        """Test --estimate-delta replaces the recorded rate by 1 - observed fraction."""
        # Arrange
        caplog.set_level(logging.INFO, logger="src.cli.main")
        runner.invoke(
            app,
            ["simulate", "--pattern", "chain", "--p", "4", "--n", "300",
             "--delta", "0.2", "--seed", "5", "--out", str(tmp_path)],
        )
        mask = np.loadtxt(tmp_path / "series.mask.csv", delimiter=",")

        # Act
        result = runner.invoke(
            app,
            ["estimate", str(tmp_path / "series"), "--lambda", "0.05", "--radius", "3.0",
             "--estimate-delta", "--format", "json", "--out", str(tmp_path / "fit")],
        )

        # Assert
        assert result.exit_code == 0, result.output
        assert (tmp_path / "fit" / "estimate.json").exists()
        assert f"Plug-in delta {1.0 - mask.mean():.6g}" in caplog.text

    def test_should_exit_with_usage_code_when_series_missing(self, tmp_path):
        """Test missing input files."""
        # Act
        result = runner.invoke(
            app, ["estimate", str(tmp_path / "absent"), "--radius", "1.0", "--out", str(tmp_path)]
        )

        # Assert
        assert result.exit_code == EXIT_USAGE


class TestReports:
    """Test diagnose, certify and verify."""

    def test_should_report_diagnostics_when_matrix_is_stable(self, tmp_path, half_identity_csv):
        """Test diagnose JSON and bounds CSV."""
        # Act
        result = runner.invoke(
            app, ["diagnose", str(half_identity_csv), "--out", str(tmp_path / "d")]
        )

        # Assert
        assert result.exit_code == 0, result.output
        payload = json.loads((tmp_path / "d" / "diagnostics.json").read_text())
        assert payload["vartheta1"] == pytest.approx(2.0, rel=1e-8)
        assert payload["support_J"] == "0 1 2"
        bounds = pd.read_csv(tmp_path / "d" / "bounds.csv")
        assert len(bounds) == 6

    def test_should_write_norm_profile_when_diagnosing(self, tmp_path, half_identity_csv):
        """Test profile.csv carries the three transfer-norm curves."""
        # Act
        result = runner.invoke(
            app, ["diagnose", str(half_identity_csv), "--grid", "128", "--out", str(tmp_path)]
        )

        # Assert
        assert result.exit_code == 0, result.output
        profile = pd.read_csv(tmp_path / "profile.csv")
        assert list(profile.columns) == ["angle", "norm0", "norm1", "norm2"]
        assert len(profile) == 128
        assert profile["norm0"].min() == pytest.approx(0.5, rel=1e-12)
        assert profile["norm1"].max() == pytest.approx(2.0, rel=1e-12)
        np.testing.assert_allclose(profile["norm1"], profile["norm2"], rtol=1e-12)

    def test_should_write_certificate_when_matrix_is_stable(self, tmp_path, half_identity_csv):
        """Test certify with default b0 = ||B||_F."""
        # Act
        result = runner.invoke(
            app,
            ["certify", str(half_identity_csv), "--n", "5000", "--delta", "0.1",
             "--format", "csv", "--out", str(tmp_path)],
        )

        # Assert
        assert result.exit_code == 0, result.output
        table = pd.read_csv(tmp_path / "certificate.csv")
        assert table.loc[0, "b0"] == pytest.approx(np.sqrt(0.75))
        assert table.loc[0, "kappa0"] == pytest.approx(9.0, rel=1e-6)
        assert table.loc[0, "constant_c0"] == 1.0

    def test_should_exit_with_numerical_code_when_matrix_is_unstable(
        self, tmp_path, unstable_csv
    ):
        """Test exit code 2 for an unstable matrix."""
        # Act
        result = runner.invoke(app, ["certify", str(unstable_csv), "--n", "100"])

        # Assert
        assert result.exit_code == EXIT_NUMERICAL

    def test_should_write_verification_when_harnesses_run(self, tmp_path, half_identity_csv):
        """Test verify output files."""
        # Act
        result = runner.invoke(
            app,
            ["verify", str(half_identity_csv), "--n", "300", "--delta", "0.2",
             "--trials", "100", "--re-trials", "50", "--t", "0.5", "--t", "1.0",
             "--seed", "4", "--out", str(tmp_path)],
        )

        # Assert
        assert result.exit_code == 0, result.output
        payload = json.loads((tmp_path / "verify.json").read_text())
        assert payload["population_deviation"] < 1e-12
        assert payload["cross_moment_residual"] < 1e-8
        tails = pd.read_csv(tmp_path / "tails.csv")
        assert list(tails["t"]) == [0.5, 1.0]

    def test_should_give_same_report_when_thread_count_changes(self, tmp_path, half_identity_csv):
        """Test verify --threads leaves every reported value unchanged."""
        # Arrange
        args = ["verify", str(half_identity_csv), "--n", "200", "--delta", "0.2",
                "--trials", "100", "--re-trials", "20", "--t", "0.5", "--seed", "9"]

        # Act
        single = runner.invoke(app, [*args, "--threads", "1", "--out", str(tmp_path / "a")])
        pooled = runner.invoke(app, [*args, "--threads", "3", "--out", str(tmp_path / "b")])

        # Assert
        assert single.exit_code == 0, single.output
        assert pooled.exit_code == 0, pooled.output
        assert (tmp_path / "a" / "verify.json").read_text() == (
            tmp_path / "b" / "verify.json"
        ).read_text()
        assert (tmp_path / "a" / "tails.csv").read_text() == (
            tmp_path / "b" / "tails.csv"
        ).read_text()


class TestExperimentCommand:
    """Test experiment and plot commands."""

    def test_should_run_sweep_when_config_given(self, tmp_path):
        """Test experiment with a seed override followed by plot."""
        # Arrange
        config = tmp_path / "exp.toml"
        config.write_text(
            'scenario = "cli"\n'
            "[grid]\np = [4]\nk = [3]\nn = [100, 200]\ndelta = [0.1]\npattern = [\"chain\"]\n"
        )
        out = tmp_path / "run"

        # Act
        result = runner.invoke(
            app,
            ["experiment", "--config", str(config), "--seed", "7", "--out", str(out),
             "--threads", "2", "--format", "csv"],
        )
        plotted = runner.invoke(app, ["plot", str(out / "results.csv")])

        # Assert
        assert result.exit_code == 0, result.output
        resolved = json.loads((out / "config.resolved.json").read_text())
        assert resolved["master_seed"] == 7
        assert plotted.exit_code == 0, plotted.output
        assert (out / "error_vs_n.png").exists()
        manifest = pd.read_csv(out / "manifest.csv")
        assert manifest.loc[0, "results"] == str(out / "results.csv")
        figures = json.loads((out / "figures.json").read_text())
        assert set(figures) == {"error_vs_n", "error_vs_delta", "support_vs_n"}

    def test_should_exit_with_usage_code_when_config_missing(self, tmp_path):
        """Test a missing config file."""
        # Act
        result = runner.invoke(app, ["experiment", "--config", str(tmp_path / "none.toml")])

        # Assert
        assert result.exit_code == EXIT_USAGE


class TestMain:
    """Test the console entry point."""

    def test_should_exit_with_numerical_code_when_matrix_is_unstable(
        self, monkeypatch, unstable_csv
    ):
        """Test main() maps numerical failures to exit code 2."""
        # Arrange
        monkeypatch.setattr(sys, "argv", ["sparsevar", "certify", str(unstable_csv), "--n", "50"])

        # Act
        with pytest.raises(SystemExit) as excinfo:
            main()

        # Assert
        assert excinfo.value.code == EXIT_NUMERICAL

    def test_should_exit_with_usage_code_when_command_unknown(self, monkeypatch):
        """Test main() maps usage errors to exit code 1."""
        # Arrange
        monkeypatch.setattr(sys, "argv", ["sparsevar", "no-such-command"])

        # Act
        with pytest.raises(SystemExit) as excinfo:
            main()

        # Assert
        assert excinfo.value.code == EXIT_USAGE

    def test_should_exit_with_usage_code_when_option_value_invalid(self, monkeypatch, tmp_path):
        """Test main() maps bad parameter values to exit code 1."""
        # Arrange
        monkeypatch.setattr(
            sys, "argv", ["sparsevar", "simulate", "--pattern", "spiral", "--out", str(tmp_path)]
        )

        # Act
        with pytest.raises(SystemExit) as excinfo:
            main()

        # Assert
        assert excinfo.value.code == EXIT_USAGE

    def test_should_print_version_when_flag_given(self):
        """Test the eager --version option."""
        # Act
        result = runner.invoke(app, ["--version"])

        # Assert
        assert result.exit_code == 0
        assert "SparseVAR Missing 0.1.0" in result.output

    def test_should_resolve_bundled_exceptions_when_imported(self):
        """Test the handled exception classes are the ones typer raises."""
        # Assert
        assert issubclass(typer.BadParameter, click_exceptions.ClickException)
        assert issubclass(click_exceptions.UsageError, click_exceptions.ClickException)
