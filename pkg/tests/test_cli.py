"""
Command-line tests through typer's CliRunner.
"""

import json

import pytest
from typer.testing import CliRunner

from retspec.cli.commands import app
from test_examples.instances import INVALID_TOML, SYMMETRIC_TOML, UNGATED_TOML

runner = CliRunner()


@pytest.fixture
def config_file(tmp_path):
    def write(text: str, name: str = "problem.toml"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return write


@pytest.mark.cli
def test_spectrum_command(config_file, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(app, ["spectrum", "--config", str(config_file(SYMMETRIC_TOML)), "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert "Eigenvalues" in result.output
    assert (out / "spectrum.csv").exists()
    assert (out / "summary.json").exists()


@pytest.mark.cli
def test_verify_passes_and_is_deterministic(config_file, tmp_path):
    path = config_file(SYMMETRIC_TOML)
    outputs = []
    for name in ("first", "second"):
        out = tmp_path / name
        result = runner.invoke(app, ["verify", "--config", str(path), "--out", str(out)])
        assert result.exit_code == 0, result.output
        outputs.append((out / "summary.json").read_bytes())
    assert outputs[0] == outputs[1]
    summary = json.loads(outputs[0])
    assert summary["passed"] is True
    assert summary["experiment"] == "verify"


@pytest.mark.cli
def test_overrides(config_file, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(
        app,
        ["spectrum", "--config", str(config_file(SYMMETRIC_TOML)), "--out", str(out), "--n-max", "3", "--seed", "11"],
    )
    assert result.exit_code == 0, result.output
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["n_max"] == 3
    assert summary["seed"] == 11


@pytest.mark.cli
def test_strict_ungated_exits_2(config_file, tmp_path):
    result = runner.invoke(
        app, ["spectrum", "--config", str(config_file(UNGATED_TOML)), "--out", str(tmp_path / "o"), "--strict"]
    )
    assert result.exit_code == 2
    assert "gamma1*delta2" in result.output


@pytest.mark.cli
def test_invalid_problem_exits_2(config_file, tmp_path):
    result = runner.invoke(app, ["spectrum", "--config", str(config_file(INVALID_TOML)), "--out", str(tmp_path / "o")])
    assert result.exit_code == 2
    assert "must be nonzero" in result.output


@pytest.mark.cli
def test_missing_config_exits_2(tmp_path):
    result = runner.invoke(app, ["trace", "--config", str(tmp_path / "absent.toml")])
    assert result.exit_code == 2
    assert "not found" in result.output
