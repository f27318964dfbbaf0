import json

import pandas as pd
import pytest

from muskat.bubble.cli import EXIT_CHECK_FAILED, EXIT_OK, EXIT_SOLVER, EXIT_USAGE, build_parser, integrals_table, main
from muskat.bubble.config import OUTPUT_DIR_ENV
from muskat.bubble.errors import ConfigError, ConvergenceError
from muskat.bubble.evolution import CSV_COLUMNS
from muskat.bubble.suites import DEFAULT_N_MODES, Criterion, SuiteReport, SuiteRunner

CIRCLE_YAML = """
params: {{a_mu: 0.3, a_sigma: 1.0, a_rho: {a_rho}, radius: 1.0}}
solver: {{n_modes: 8, t_end: 0.01, dt: 0.005, record_every: 1}}
outputs: {{directory: {directory}, name: Small Circle}}
"""


@pytest.fixture(autouse=True)
def no_output_override(monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)


@pytest.fixture
def config_file(tmp_path):
    """Writes a circle configuration whose outputs land in tmp_path/out."""
    def write(a_rho: float = 1.0):
        path = tmp_path / "circle.yaml"
        path.write_text(CIRCLE_YAML.format(a_rho=a_rho, directory=tmp_path / "out"))
        return path
    return write


class TestParser:
    """Test suite for argument parsing."""

    def test_verify_arguments(self):
        args = build_parser().parse_args(["-q", "verify", "--suite", "decay", "--jobs", "4", "--n-modes", "32"])
        assert args.quiet
        assert (args.suite, args.jobs, args.n_modes, args.output) == ("decay", 4, 32, None)

    def test_verify_band_defaults_to_target_resolution(self):
        args = build_parser().parse_args(["verify", "--suite", "decay"])
        assert args.n_modes == DEFAULT_N_MODES == 128

    def test_errors_raise(self):
        with pytest.raises(ConfigError):
            build_parser().parse_args(["analyze", "c.yaml", "--spectrum", "--transform"])

    @pytest.mark.parametrize("argv", [[], ["verify"], ["-v", "-q", "simulate", "c.yaml"], ["plot", "c.yaml"]])
    def test_usage_exit_code(self, argv):
        assert main(argv) == EXIT_USAGE


class TestSimulate:
    """Test suite for the simulate command."""

    def test_writes_outputs(self, config_file, tmp_path):
        assert main(["simulate", str(config_file())]) == EXIT_OK
        frame = pd.read_csv(tmp_path / "out" / "small-circle-trajectory.csv")
        assert list(frame.columns) == CSV_COLUMNS
        assert frame["t"].iloc[-1] == pytest.approx(0.01)
        assert (tmp_path / "out" / "small-circle-final-state.json").exists()

    def test_output_dir_override(self, config_file, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "elsewhere"))
        assert main(["simulate", str(config_file())]) == EXIT_OK
        assert (tmp_path / "elsewhere" / "small-circle-trajectory.json").exists()

    def test_solver_failure(self, config_file, tmp_path, mocker):
        """A failed run still writes its partial trajectory."""
        mocker.patch("muskat.bubble.evolution._advance", side_effect=ConvergenceError("vorticity diverged"))
        assert main(["simulate", str(config_file())]) == EXIT_SOLVER
        record = json.loads((tmp_path / "out" / "small-circle-trajectory.json").read_text())
        assert record["status"] == "failed"

    def test_missing_config(self, tmp_path):
        assert main(["simulate", str(tmp_path / "absent.yaml")]) == EXIT_USAGE

    def test_malformed_config(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("params: {a_mu: 0.3, a_sigma: 1.0, a_rho: 1.0, radius: 1.0}\nsolver: {n_modes: 2}\n")
        assert main(["simulate", str(path)]) == EXIT_USAGE


class TestAnalyze:
    """Test suite for the analyze command."""

    def test_transform_without_gravity(self, config_file, tmp_path):
        """With A_ρ = 0 the transform is the identity and C_S = 1."""
        assert main(["analyze", str(config_file(a_rho=0.0)), "--transform"]) == EXIT_OK
        result = json.loads((tmp_path / "out" / "small-circle-analyze.json").read_text())
        assert set(result) == {"transform"}
        assert result["transform"]["cs"] == 1.0
        assert result["transform"]["inverse_residual"] == 0.0

    def test_spectrum(self, config_file, tmp_path):
        assert main(["analyze", str(config_file()), "--spectrum"]) == EXIT_OK
        result = json.loads((tmp_path / "out" / "small-circle-analyze.json").read_text())
        rows = result["spectrum"]["rows"]
        assert len(rows) == 8
        assert rows[1]["a"] == pytest.approx(6.0)

    def test_integrals_table(self):
        table = integrals_table(max_k=4)
        assert [row["k"] for row in table["rows"]] == [-4, -3, -2, -1, 1, 2, 3, 4]
        assert table["max_diff"] < 1e-9


class TestVerify:
    """Test suite for the verify command."""

    def test_unknown_suite(self):
        assert main(["verify", "--suite", "everything"]) == EXIT_USAGE

    @pytest.mark.parametrize("argv", [["--jobs", "0"], ["--n-modes", "8"]])
    def test_bad_options(self, argv):
        assert main(["verify", "--suite", "integrals", *argv]) == EXIT_USAGE

    @pytest.mark.parametrize("passed, code", [(True, EXIT_OK), (False, EXIT_CHECK_FAILED)])
    def test_exit_code_follows_report(self, mocker, tmp_path, passed, code):
        report = SuiteReport("integrals", 1, 64, [Criterion("closed form", passed, 0.5, 1.0)])
        mocker.patch.object(SuiteRunner, "run", return_value=report)
        assert main(["verify", "--suite", "integrals", "--seed", "1", "--output", str(tmp_path)]) == code
        written = json.loads((tmp_path / "integrals-verify.json").read_text())
        assert written["passed"] is passed


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
