import numpy as np
import pytest

from core.boundaries import INFLOW, LINEAR, OUTFLOW, PERIODIC, PERIODIC_SHIFT, apply_boundaries
from tests.conftest import make_grid


@pytest.fixture
def grid():
    return make_grid((4,))


def _ramp(grid):
    field = np.zeros((1,) + grid.padded)
    field[0, grid.interior[0]] = np.arange(1.0, 5.0)
    return field


def test_periodic_wraps(grid):
    field = apply_boundaries(_ramp(grid), grid, [(PERIODIC, PERIODIC)])
    assert field[0].tolist() == [3.0, 4.0, 1.0, 2.0, 3.0, 4.0, 1.0, 2.0]


def test_periodic_shift_adds_the_jump(grid):
    field = apply_boundaries(_ramp(grid), grid, [(PERIODIC_SHIFT, PERIODIC_SHIFT)], jumps=[np.array([4.0])])
    assert field[0].tolist() == [-1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]


def test_outflow_copies_the_edge(grid):
    field = apply_boundaries(_ramp(grid), grid, [(OUTFLOW, OUTFLOW)])
    assert field[0].tolist() == [1.0, 1.0, 1.0, 2.0, 3.0, 4.0, 4.0, 4.0]


def test_linear_extrapolates(grid):
    field = apply_boundaries(_ramp(grid) * 2.0 + 1.0, grid, [(LINEAR, LINEAR)])
    assert np.allclose(field[0], 2.0 * np.arange(-1.0, 7.0) + 1.0)


def test_inflow_uses_frozen_values(grid):
    frozen = np.full((1,) + grid.padded, 9.0)
    field = apply_boundaries(_ramp(grid), grid, [(INFLOW, OUTFLOW)], frozen=frozen)
    assert field[0].tolist() == [9.0, 9.0, 1.0, 2.0, 3.0, 4.0, 4.0, 4.0]


def test_corner_ghosts_are_filled():
    grid = make_grid((3, 3))
    field = np.zeros((1,) + grid.padded)
    field[(0,) + grid.interior] = 5.0
    apply_boundaries(field, grid, [(OUTFLOW, OUTFLOW)] * 2)
    assert np.all(field == 5.0)


@pytest.mark.parametrize("rules, kwargs", [
    ([(INFLOW, OUTFLOW)], {}),
    ([(PERIODIC_SHIFT, PERIODIC_SHIFT)], {}),
    ([("mirror", OUTFLOW)], {}),
    ([(OUTFLOW, OUTFLOW)] * 2, {}),
])
def test_invalid_rules_are_rejected(grid, rules, kwargs):
    with pytest.raises(ValueError):
        apply_boundaries(_ramp(grid), grid, rules, **kwargs)
