import pandas as pd
import pytest
from click.testing import CliRunner

from app.main import EXIT_CONFIG, cli


def _write(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


def test_missing_key_exits_with_config_code(tmp_path):
    result = CliRunner().invoke(cli, ["run", _write(tmp_path, "problem = advect1d\n")])
    assert result.exit_code == EXIT_CONFIG
    assert "nx" in result.output


def test_unknown_problem_exits_with_config_code(tmp_path):
    result = CliRunner().invoke(cli, ["run", _write(tmp_path, "problem = vortex\nnx = 8\n")])
    assert result.exit_code == EXIT_CONFIG


def test_run_writes_snapshot_and_diagnostics(tmp_path):
    out = tmp_path / "out"
    config = _write(tmp_path, f"problem = advect1d\nnx = 20\nt_final = 0.05\noutput_dir = {out}\n")
    result = CliRunner().invoke(cli, ["--log-level", "WARNING", "run", config])
    assert result.exit_code == 0, result.output
    assert (out / "advect1d_20_diagnostics.csv").exists()
    snapshots = sorted(out.glob("advect1d_20_*.csv"))
    assert any("diagnostics" not in p.name for p in snapshots)
    history = pd.read_csv(out / "advect1d_20_diagnostics.csv")
    assert history["t"].iloc[-1] == pytest.approx(0.05)


def test_converge_writes_table(tmp_path):
    config = _write(tmp_path, "problem = advect1d-sine\nnx = 8\nlevels = 2\nt_final = 0\n")
    table = tmp_path / "table.csv"
    result = CliRunner().invoke(cli, ["converge", config, "--table", str(table), "--set", "output_formats=csv"])
    assert result.exit_code == 0, result.output
    assert list(pd.read_csv(table)["grid"]) == ["8", "16", "EOC"]


def test_folding_beta_exits_with_config_code(tmp_path):
    config = _write(tmp_path, "problem = alfven2.5d\nnx = 16\ngrid = colella\nbeta = 1.0\n")
    result = CliRunner().invoke(cli, ["run", config])
    assert result.exit_code == EXIT_CONFIG
    assert "beta" in result.output
