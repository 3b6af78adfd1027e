import numpy as np
import pytest

from core.errors import ReconstructionError
from core.geometry import cell_averages
from core.reconstruction import LeastSquaresReconstruction, interface_states, reconstruct
from tests.conftest import make_grid


def _averages(func, grid):
    return cell_averages(lambda x: np.stack([func(x)]), grid, padded=True)


@pytest.mark.parametrize("weno", [True, False])
def test_constant_field_is_reproduced(mapped_grid, weno):
    operator = LeastSquaresReconstruction(mapped_grid, weno=weno)
    polys = reconstruct(np.full((1,) + mapped_grid.padded, 7.5), operator)
    for axis in range(2):
        minus, plus = interface_states(polys, axis)
        assert np.allclose(minus, 7.5, atol=1e-12)
        assert np.allclose(plus, 7.5, atol=1e-12)
    assert np.allclose(polys.volume_values(), 7.5, atol=1e-12)


def test_quadratic_is_exact_on_cartesian_grid(square_grid):
    operator = LeastSquaresReconstruction(square_grid, weno=False)
    polys = reconstruct(_averages(lambda x: x[0] ** 2 - x[1], square_grid), operator)
    for axis in range(2):
        points = square_grid.faces[axis]["points"][(slice(None), slice(None)) + square_grid.interior_faces(axis)]
        exact = points[0] ** 2 - points[1]
        minus, plus = polys.face_traces(axis)
        assert np.max(np.abs(minus[0] - exact)) < 1e-10
        assert np.max(np.abs(plus[0] - exact)) < 1e-10
    assert np.allclose(polys.laplacian()[0], 2.0, atol=1e-8)


def test_linear_field_gives_continuous_traces(mapped_grid):
    operator = LeastSquaresReconstruction(mapped_grid, weno=True)
    polys = reconstruct(_averages(lambda x: 3.0 * x[0] + 0.5 * x[1], mapped_grid), operator)
    for axis in range(2):
        minus, plus = polys.face_traces(axis)
        assert np.max(np.abs(minus - plus)) < 1e-10


def test_traces_converge_at_third_order():
    errors = []
    for n in (32, 64):
        grid = make_grid((n,))
        operator = LeastSquaresReconstruction(grid, weno=False)
        polys = reconstruct(_averages(lambda x: np.sin(2 * np.pi * x[0]), grid), operator)
        points = grid.faces[0]["points"][(0, slice(None)) + grid.interior_faces(0)]
        minus, _ = polys.face_traces(0)
        errors.append(np.max(np.abs(minus[0] - np.sin(2 * np.pi * points))))
    assert errors[0] / errors[1] > 6.0


def test_step_traces_stay_bounded():
    grid = make_grid((20,), periodic=(False,))
    field = _averages(lambda x: (x[0] > 0.5).astype(float), grid)
    polys = reconstruct(field, LeastSquaresReconstruction(grid, weno=True))
    minus, plus = polys.face_traces(0)
    for traces in (minus, plus):
        assert traces.min() >= -0.01
        assert traces.max() <= 1.01


def test_step_jump_sits_on_the_discontinuous_face():
    grid = make_grid((20,), periodic=(False,))
    field = _averages(lambda x: (x[0] > 0.5).astype(float), grid)
    polys = reconstruct(field, LeastSquaresReconstruction(grid, weno=True))
    minus, plus = polys.face_traces(0)
    jump = plus[0, 0] - minus[0, 0]
    assert jump[10] == pytest.approx(1.0, abs=0.01)


def test_degenerate_stencil_is_rejected(monkeypatch):
    grid = make_grid((4, 4))
    monkeypatch.setattr(np.linalg, "matrix_rank", lambda matrix: np.zeros(matrix.shape[:-2], dtype=int))
    with pytest.raises(ReconstructionError):
        LeastSquaresReconstruction(grid)
