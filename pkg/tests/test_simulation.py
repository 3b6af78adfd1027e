import numpy as np
import pandas as pd
import pytest

from config.settings import RunConfig
from core.errors import PositivityError
from core.reference import REFERENCE_COLUMNS, reference_1d_solution, sample_reference, write_reference
from core.simulation import run_simulation
from core.timestepper import ConstrainedTransportSolver


def test_run_without_writing_returns_final_state(tmp_path):
    result = run_simulation(RunConfig(problem="advect1d", nx=20, t_final=0.05, output_dir=str(tmp_path)),
                            write=False)
    assert result.state.t == pytest.approx(0.05)
    assert result.paths == []
    assert list(tmp_path.iterdir()) == []
    assert result.diagnostics["step"].iloc[-1] == result.state.step


def test_snapshots_every_n_steps(tmp_path):
    config = RunConfig(problem="advect1d", nx=20, max_steps=4, t_final=1.0, output_every=2, output_dir=str(tmp_path))
    result = run_simulation(config)
    names = sorted(p.name for p in result.paths)
    assert names == ["advect1d_20_000000.csv", "advect1d_20_000002.csv", "advect1d_20_000004.csv",
                     "advect1d_20_diagnostics.csv"]


def test_failure_flushes_last_good_state(tmp_path, monkeypatch):
    original = ConstrainedTransportSolver.step

    def failing_step(self, state, dt):
        if state.step >= 2:
            raise PositivityError((0,), np.zeros(8), stage=1)
        return original(self, state, dt)

    monkeypatch.setattr(ConstrainedTransportSolver, "step", failing_step)
    with pytest.raises(PositivityError):
        run_simulation(RunConfig(problem="advect1d", nx=20, t_final=1.0, output_dir=str(tmp_path)))
    assert (tmp_path / "advect1d_20_000002.csv").exists()
    history = pd.read_csv(tmp_path / "advect1d_20_diagnostics.csv")
    assert list(history["step"]) == [0, 1, 2]


@pytest.fixture(scope="module")
def coarse_reference():
    return reference_1d_solution("shocktube", cells=200, t_final=0.05)


def test_reference_profile_columns(coarse_reference):
    assert list(coarse_reference.columns) == REFERENCE_COLUMNS
    assert len(coarse_reference) == 200
    assert np.all(np.diff(coarse_reference["x"]) > 0)
    assert np.allclose(coarse_reference["Bx"], 0.5641895835)
    assert (coarse_reference["rho"] > 0).all() and (coarse_reference["p"] > 0).all()


def test_reference_is_cached(coarse_reference):
    again = reference_1d_solution("shocktube", cells=200, t_final=0.05)
    pd.testing.assert_frame_equal(again, coarse_reference)


def test_reference_far_field_is_unchanged(coarse_reference):
    x = np.array([-0.69, 0.69])
    rho = sample_reference(coarse_reference, x, "rho")
    assert rho[0] == pytest.approx(coarse_reference["rho"].iloc[0])
    assert rho[1] == pytest.approx(coarse_reference["rho"].iloc[-1])


def test_write_reference(coarse_reference, tmp_path):
    path = write_reference(coarse_reference, tmp_path / "ref" / "reference.dat")
    header, first = path.read_text().splitlines()[:2]
    assert header.split() == REFERENCE_COLUMNS
    assert len(first.split()) == 6


def test_problem_without_reference_is_rejected():
    with pytest.raises(ValueError):
        reference_1d_solution("alfven2.5d", cells=10)


def test_reference_at_time_zero_is_the_initial_jump():
    profile = reference_1d_solution("shocktube", cells=20, t_final=0.0)
    left, right = profile[profile["x"] < 0], profile[profile["x"] > 0]
    assert np.allclose(left["rho"], 1.08) and np.allclose(right["rho"], 1.0)
    assert np.allclose(left["p"], 0.95) and np.allclose(right["p"], 1.0)
    assert np.allclose(profile["Bx"], 2.0 / np.sqrt(4.0 * np.pi))
