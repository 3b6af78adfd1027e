import numpy as np
import pytest

from config.settings import RunConfig
from core.curl import (curl_of_potential, divergence_diagnostic, divergence_field, face_potential_values,
                       field_budget, total_field_budget)
from core.geometry import cell_averages
from core.problems import setup_problem
from core.reconstruction import LeastSquaresReconstruction, reconstruct
from core.timestepper import SSP_RK3, ConstrainedTransportSolver
from tests.conftest import make_grid


def _polynomials(potential, grid, components=(0, 1, 2), weno=False):
    field = cell_averages(potential, grid, padded=True)[list(components)]
    return reconstruct(field, LeastSquaresReconstruction(grid, weno=weno))


def _padded(field, grid):
    return cell_averages(field, grid, padded=True)


def test_constant_potential_has_no_field(mapped_grid):
    polys = _polynomials(lambda x: np.stack([np.full_like(x[0], c) for c in (1.0, -2.0, 0.5)]), mapped_grid)
    assert np.max(np.abs(curl_of_potential(polys, mapped_grid))) < 1e-12


@pytest.mark.parametrize("grid_name", ["square_grid", "mapped_grid"])
def test_scalar_potential_x_gives_unit_negative_by(request, grid_name):
    grid = request.getfixturevalue(grid_name)
    polys = _polynomials(lambda x: np.stack([x[0]]), grid, components=(0,))
    B = curl_of_potential(polys, grid, components=(2,))
    assert np.allclose(B[0], 0.0, atol=1e-12)
    assert np.allclose(B[1], -1.0, atol=1e-12)
    assert np.allclose(B[2], 0.0, atol=1e-12)


def test_full_linear_potential_gives_its_uniform_field(mapped_grid):
    field = np.array([0.3, -0.7, 1.1])

    def potential(x):
        # A = (0, x B3, y B1 - x B2)
        return np.stack([np.zeros_like(x[0]), x[0] * field[2], x[1] * field[0] - x[0] * field[1]])

    B = curl_of_potential(_polynomials(potential, mapped_grid), mapped_grid)
    assert np.allclose(B, field[:, None, None], atol=1e-12)


def test_face_values_are_midpoints_of_jumping_data():
    grid = make_grid((10,), periodic=(False,))
    field = cell_averages(lambda x: np.stack([(x[0] > 0.5).astype(float)]), grid, padded=True)
    polys = reconstruct(field, LeastSquaresReconstruction(grid))
    traces = face_potential_values(polys, grid)[0]
    minus, plus = polys.face_traces(0)
    assert np.allclose(traces, 0.5 * (minus + plus))


def test_curl_converges_at_third_order():
    errors = []
    for n in (16, 32):
        grid = make_grid((n, n))
        polys = _polynomials(lambda x: np.stack([np.sin(2 * np.pi * x[0]) * np.sin(2 * np.pi * x[1])]), grid,
                             components=(0,))
        B = curl_of_potential(polys, grid, components=(2,))
        exact = cell_averages(lambda x: 2 * np.pi * np.stack([
            np.sin(2 * np.pi * x[0]) * np.cos(2 * np.pi * x[1]),
            -np.cos(2 * np.pi * x[0]) * np.sin(2 * np.pi * x[1]),
        ]), grid)
        errors.append(np.sum(np.abs(B[:2] - exact)) / n ** 2)
    assert errors[0] / errors[1] > 6.0


def test_divergence_of_uniform_field_vanishes(mapped_grid):
    B = np.broadcast_to(np.array([0.3, -0.7, 1.1]).reshape(3, 1, 1), (3,) + mapped_grid.padded)
    stats = divergence_diagnostic(B, mapped_grid)
    assert stats.max < 1e-12
    assert stats.l1 < 1e-12


def test_divergence_of_linear_bx_is_one(square_grid):
    B = _padded(lambda x: np.stack([x[0], np.zeros_like(x[0]), np.zeros_like(x[0])]), square_grid)
    assert np.allclose(divergence_field(B, square_grid), 1.0)
    assert divergence_diagnostic(B, square_grid).l1 == pytest.approx(1.0)


def test_periodic_potential_has_zero_field_budget(mapped_grid, rng):
    k = rng.integers(1, 3, size=3)
    phase = rng.uniform(0, 2 * np.pi, size=3)

    def potential(x):
        return np.stack([np.sin(2 * np.pi * k[c] * x[c % 2] + phase[c]) * np.cos(2 * np.pi * x[1 - c % 2])
                         for c in range(3)])

    B = curl_of_potential(_polynomials(potential, mapped_grid, weno=True), mapped_grid)
    assert np.max(np.abs(field_budget(B, mapped_grid))) < 1e-12


def test_field_budget_change(square_grid):
    before = np.ones((3,) + square_grid.dims)
    after = before.copy()
    after[1, 0, 0] += 64.0
    assert np.allclose(total_field_budget(before, after, square_grid), [0.0, 1.0, 0.0])


def test_field_budget_is_kept_by_every_stage():
    state, problem, config = setup_problem(RunConfig(problem="alfven2.5d", nx=8, output_formats=[]))
    solver = ConstrainedTransportSolver(state.grid, problem, config)
    solver.fill_ghosts(state)
    dt = solver.compute_dt(state)

    previous = state
    for number, coeffs in enumerate(SSP_RK3, start=1):
        current = solver.ct_stage(previous, state, coeffs, dt, stage=number)
        change = total_field_budget(previous.magnetic_field, current.magnetic_field, state.grid)
        assert np.allclose(change, 0.0, atol=1e-12)
        previous = current
