"""End-to-end tests for the command-line interface."""

import csv
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest
from click.testing import CliRunner

from gfftkit import __version__
from gfftkit.cli import EXIT_ERROR, EXIT_FAILED, EXIT_OK, cli, run
from gfftkit.core.exceptions import GfftError

REPO_ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


def _rows(path: Path) -> list[list[str]]:
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.reader(f))


# ── Group ──


def test_version(runner: CliRunner) -> None:
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == EXIT_OK
    assert __version__ in result.output


def test_unknown_theorem_via_run(write_config) -> None:
    path = write_config()
    assert run(["verify", "nonsense", "--config", str(path)]) == EXIT_ERROR


def test_missing_config_file(runner: CliRunner, tmp_path: Path) -> None:
    result = runner.invoke(cli, ["validate", "--config", str(tmp_path / "none.toml")])
    assert result.exit_code == EXIT_ERROR


# ── validate ──


class TestValidate:
    def test_valid_space(self, runner: CliRunner, write_config) -> None:
        result = runner.invoke(cli, ["validate", "--config", str(write_config())])
        assert result.exit_code == EXIT_OK
        assert "All checks passed" in result.output

    def test_decreasing_variance(self, runner: CliRunner, write_config) -> None:
        path = write_config(space={"b_params": [-1.0]})
        result = runner.invoke(cli, ["validate", "--config", str(path)])
        assert result.exit_code == EXIT_FAILED
        assert "check(s) failed" in result.output

    def test_invalid_config(self, runner: CliRunner, write_config) -> None:
        path = write_config(run={"q1": 0.4})
        result = runner.invoke(cli, ["validate", "--config", str(path)])
        assert result.exit_code == EXIT_ERROR
        assert "q0" in result.output

    def test_error_details_are_logged(
        self, runner: CliRunner, write_config, isolated_home: Path
    ) -> None:
        path = write_config(run={"n_list": [4, 2]})
        result = runner.invoke(cli, ["validate", "--config", str(path)])
        assert result.exit_code == EXIT_ERROR
        lines = (isolated_home / "logs" / "cli.jsonl").read_text(encoding="utf-8")
        record = json.loads(lines.splitlines()[-1])
        assert record["level"] == "ERROR"
        assert record["error_type"] == "ConfigurationError"
        assert "run.n_list" in record["fields"]
        assert not hasattr(GfftError("x"), "recoverable")


# ── sample-paths / eval ──


class TestPaths:
    def test_sample_paths_csv(self, runner: CliRunner, write_config, tmp_path: Path) -> None:
        out = tmp_path / "paths.csv"
        result = runner.invoke(
            cli,
            ["sample-paths", "--config", str(write_config()), "--count", "3", "--out", str(out)],
        )
        assert result.exit_code == EXIT_OK
        rows = _rows(out)
        assert rows[0] == ["path_id", "t", "x"]
        assert len(rows) - 1 == 3 * 129
        first = [r for r in rows[1:] if r[0] == "0"]
        assert float(first[0][1]) == 0.0
        assert float(first[0][2]) == 0.0
        assert float(first[-1][1]) == 1.0

    def test_sample_paths_needs_out(self, runner: CliRunner, write_config) -> None:
        result = runner.invoke(cli, ["sample-paths", "--config", str(write_config())])
        assert result.exit_code == EXIT_ERROR
        assert "--out" in result.output

    def test_sample_paths_grid_override(
        self, runner: CliRunner, write_config, tmp_path: Path
    ) -> None:
        out = tmp_path / "paths.csv"
        args = ["sample-paths", "--config", str(write_config()), "--count", "2"]
        result = runner.invoke(cli, [*args, "--grid-n", "16", "--out", str(out)])
        assert result.exit_code == EXIT_OK
        assert len(_rows(out)) - 1 == 2 * 17

    def test_eval_csv(self, runner: CliRunner, write_config, tmp_path: Path) -> None:
        out = tmp_path / "values.csv"
        result = runner.invoke(
            cli, ["eval", "--config", str(write_config()), "--count", "4", "--out", str(out)]
        )
        assert result.exit_code == EXIT_OK
        rows = _rows(out)
        assert rows[0] == ["path_id", "value_re", "value_im"]
        assert [r[0] for r in rows[1:]] == ["0", "1", "2", "3"]
        # |F| ≤ total variation of the measure
        for _, re, im in rows[1:]:
            assert abs(complex(float(re), float(im))) <= abs(complex(0.7, 0.2)) + 1e-12


# ── gfft / feynman ──


class TestTransforms:
    def test_gfft(self, runner: CliRunner, write_config, tmp_path: Path) -> None:
        out = tmp_path / "gfft.csv"
        result = runner.invoke(cli, ["gfft", "--config", str(write_config()), "--out", str(out)])
        assert result.exit_code == EXIT_OK
        assert "bound holds: True" in result.output
        rows = _rows(out)
        assert rows[0] == ["lambda", "value_re", "value_im"]
        assert [r[0] for r in rows[1:]] == ["boundary", "interior"]

    def test_gfft_boundary_outside_gamma(self, runner: CliRunner, write_config) -> None:
        path = write_config(run={"q2": -0.5})
        result = runner.invoke(cli, ["gfft", "--config", str(path)])
        assert result.exit_code == EXIT_ERROR
        assert "|q2| = 0.5 must exceed q0 = 0.5" in result.output

    def test_feynman_with_kernel(self, runner: CliRunner, write_config, tmp_path: Path) -> None:
        out = tmp_path / "feynman.csv"
        path = write_config(
            operators={"phi1_poly": [0.5], "phi2_poly": [0.0], "phi_poly": [0.5]}
        )
        result = runner.invoke(cli, ["feynman", "--config", str(path), "--out", str(out)])
        assert result.exit_code == EXIT_OK
        rows = _rows(out)
        assert [r[0] for r in rows[1:]] == ["feynman", "kernel"]
        feynman = complex(float(rows[1][1]), float(rows[1][2]))
        kernel = complex(float(rows[2][1]), float(rows[2][2]))
        assert abs(feynman - kernel) <= 1e-10

    def test_feynman_without_kernel(self, runner: CliRunner, write_config) -> None:
        result = runner.invoke(cli, ["feynman", "--config", str(write_config())])
        assert result.exit_code == EXIT_OK
        assert "Kernel form" not in result.output


# ── verify ──


class TestVerify:
    def test_cs_feynman(self, runner: CliRunner, write_config) -> None:
        result = runner.invoke(cli, ["verify", "cs-feynman", "--config", str(write_config())])
        assert result.exit_code == EXIT_OK
        assert "All 2 comparison(s) passed" in result.output

    def test_section9_needs_phi(self, runner: CliRunner, write_config) -> None:
        result = runner.invoke(cli, ["verify", "section9", "--config", str(write_config())])
        assert result.exit_code == EXIT_ERROR
        assert "phi_poly" in result.output

    def test_section9(self, runner: CliRunner, write_config, tmp_path: Path) -> None:
        path = write_config(operators={"phi_poly": [-0.5, 1.0]})
        out = tmp_path / "section9.csv"
        args = ["verify", "section9", "--config", str(path), "--out", str(out)]
        result = runner.invoke(cli, args)
        assert result.exit_code == EXIT_OK
        assert [r[0] for r in _rows(out)[1:]] == ["section9"]

    def test_kernel_form_alias(self, runner: CliRunner, write_config) -> None:
        path = write_config(operators={"phi_poly": [-0.5, 1.0]})
        result = runner.invoke(cli, ["verify", "kernel-form", "--config", str(path)])
        assert result.exit_code == EXIT_OK
        assert "All 1 comparison(s) passed" in result.output

    def test_variation(self, runner: CliRunner, write_config, tmp_path: Path) -> None:
        out = tmp_path / "variation.csv"
        result = runner.invoke(
            cli, ["verify", "variation", "--config", str(write_config()), "--out", str(out)]
        )
        assert result.exit_code == EXIT_OK
        ids = [r[0] for r in _rows(out)[1:]]
        assert ids == ["variation-limit"] * 3 + ["variation-limit-mc"] + [
            "variation-scale"
        ] * 3 + ["variation-scale-mc"]

    def test_home_receives_logs(
        self, runner: CliRunner, write_config, tmp_path: Path, isolated_home: Path
    ) -> None:
        home = tmp_path / "elsewhere"
        args = ["--home", str(home), "verify", "cs-feynman", "--config", str(write_config())]
        result = runner.invoke(cli, args)
        assert result.exit_code == EXIT_OK
        assert (home / "logs" / "verify.jsonl").exists()
        assert (home / "logs" / "config.jsonl").exists()
        assert not (isolated_home / "logs" / "verify.jsonl").exists()

    def test_translation_is_reproducible(
        self, runner: CliRunner, write_config, tmp_path: Path
    ) -> None:
        path = write_config()
        outputs = []
        for name in ("first.csv", "second.csv"):
            out = tmp_path / name
            args = ["verify", "translation", "--config", str(path), "--seed", "42"]
            result = runner.invoke(cli, [*args, "--out", str(out)])
            assert result.exit_code == EXIT_OK
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]
        header = outputs[0].decode("utf-8").splitlines()[0]
        assert header == (
            "theorem_id,n,closed_re,closed_im,est_re,est_im,"
            "stderr,discrepancy,threshold,pass"
        )

    def test_limit_chart(self, runner: CliRunner, write_config, tmp_path: Path) -> None:
        chart = tmp_path / "limit.svg"
        out = tmp_path / "limit.csv"
        result = runner.invoke(
            cli,
            [
                "verify", "limit", "--config", str(write_config()),
                "--out", str(out), "--chart", str(chart),
            ],
        )
        assert result.exit_code == EXIT_OK
        assert chart.read_text(encoding="utf-8").lstrip().startswith("<?xml")
        ids = [r[0] for r in _rows(out)[1:]]
        assert ids == ["limit", "limit", "limit", "limit-mc"]

    def test_chart_rejected_for_other_theorems(
        self, runner: CliRunner, write_config, tmp_path: Path
    ) -> None:
        result = runner.invoke(
            cli,
            [
                "verify", "cs-feynman", "--config", str(write_config()),
                "--chart", str(tmp_path / "x.svg"),
            ],
        )
        assert result.exit_code == EXIT_ERROR

    def test_failed_comparison_exit_code(self, runner: CliRunner, write_config) -> None:
        # n = 1 leaves the quadratic atom far from the boundary value
        path = write_config(
            measure={"atoms": [{"coef_re": 1.0, "z_poly": [0.5, -2.0, 3.0]}]},
            run={"n_list": [1], "basis_size": 1},
        )
        result = runner.invoke(cli, ["verify", "limit", "--config", str(path)])
        assert result.exit_code == EXIT_FAILED
        assert "comparison(s) failed" in result.output

    @pytest.mark.slow
    def test_all(self, runner: CliRunner, write_config) -> None:
        path = write_config(operators={"phi_poly": [-0.5, 1.0]})
        result = runner.invoke(cli, ["verify", "all", "--config", str(path)])
        assert result.exit_code == EXIT_OK


@pytest.mark.integration
def test_module_entry_point(tmp_path: Path) -> None:
    env = os.environ.copy()
    pythonpath = env.get("PYTHONPATH")
    env["PYTHONPATH"] = (
        str(REPO_ROOT) if not pythonpath else f"{REPO_ROOT}{os.pathsep}{pythonpath}"
    )
    env["GFFT_HOME"] = str(tmp_path / "home")
    result = subprocess.run(
        [sys.executable, "-m", "gfftkit.cli", "--help"],
        cwd=REPO_ROOT,
        capture_output=True,
        text=True,
        check=False,
        env=env,
    )
    assert result.returncode == EXIT_OK
    assert "verify" in result.stdout


@pytest.mark.slow
@pytest.mark.integration
@pytest.mark.parametrize(
    "path", sorted((REPO_ROOT / "configs").glob("*.toml")), ids=lambda p: p.stem
)
def test_shipped_configs_pass_all(runner: CliRunner, path: Path) -> None:
    result = runner.invoke(cli, ["verify", "all", "--config", str(path), "--samples", "5000"])
    assert result.exit_code == EXIT_OK, result.output
