import numpy as np
import pytest

from config.settings import RunConfig
from core.convergence import ConvergenceReport, eoc, l1_error, run_convergence
from core.errors import ConfigError
from core.simulation import run_simulation
from tests.conftest import make_grid


def test_eoc_of_third_order_errors():
    assert eoc(8e-3, 1e-3) == pytest.approx(3.0)
    assert np.allclose(eoc([4.0, 2.0], [1.0, 1.0]), [2.0, 1.0])


def test_l1_error_of_constant_offset(mapped_grid):
    values = np.ones((2,) + mapped_grid.dims)
    exact = values - np.array([0.5, -0.25])[:, None, None]
    assert np.allclose(l1_error(values, exact, mapped_grid), [0.5, 0.25])


def test_l1_error_rejects_shape_mismatch():
    grid = make_grid((4, 4))
    with pytest.raises(ValueError):
        l1_error(np.zeros((1, 4, 4)), np.zeros((1, 4, 5)), grid)


def test_report_table():
    report = ConvergenceReport(problem="p", resolutions=["8", "16"], variables=["rho"], errors=[[8e-3], [1e-3]])
    assert report.final_orders() == {"rho": pytest.approx(3.0)}
    frame = report.to_frame()
    assert list(frame["grid"]) == ["8", "16", "EOC"]


def test_convergence_doubles_every_axis():
    seen = []

    def runner(config, write=False):
        seen.append((config.nx, config.ny))
        return run_simulation(config.model_copy(update={"t_final": 0.0}), write=write)

    report = run_convergence(RunConfig(problem="alfven2.5d", nx=4, levels=2, output_formats=[]), runner=runner)
    assert seen == [(4, 8), (8, 16)]
    assert report.resolutions == ["4x8", "8x16"]
    assert "A3" in report.variables and "rho" in report.variables


def test_problem_without_exact_solution_or_reference_is_rejected():
    with pytest.raises(ConfigError):
        run_convergence(RunConfig(problem="cloudshock2.5d", nx=8, output_formats=[]))


def test_advection_errors_at_time_zero_are_tiny():
    report = run_convergence(RunConfig(problem="advect1d-sine", nx=16, levels=2, t_final=0.0, output_formats=[]))
    assert max(report.errors[-1]) < 1e-12


@pytest.mark.slow
def test_alfven_wave_converges_at_third_order():
    report = run_convergence(RunConfig(problem="alfven2.5d", nx=16, levels=3, output_formats=[]))
    assert all(2.7 <= order <= 3.3 for order in report.final_orders().values())
