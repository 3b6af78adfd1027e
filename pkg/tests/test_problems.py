import numpy as np
import pytest

from config.settings import RunConfig
from core.curl import curl_of_potential
from core.errors import ConfigError
from core.mhd import BX, BZ, RHO, pressure
from core.problems import (CLOUD_DENSITY, PROBLEMS, SHOCKTUBE_LEFT, get_problem, hat_profile,
                           resolve_defaults, setup_problem)
from core.reconstruction import LeastSquaresReconstruction, reconstruct


def test_registry_holds_the_benchmarks():
    assert {"alfven2.5d", "alfven3d", "shocktube", "cloudshock2.5d", "advect1d"} <= set(PROBLEMS)


def test_unknown_problem_names_the_key():
    with pytest.raises(ConfigError) as info:
        get_problem("orszag-tang")
    assert info.value.key == "problem"


def test_defaults_follow_the_problem():
    config = resolve_defaults(RunConfig(problem="alfven2.5d", nx=8))
    assert config.ny == 16
    assert config.cfl == 0.5
    assert config.t_final == 1.0
    assert config.grid == "cartesian"


def test_explicit_values_are_kept():
    config = resolve_defaults(RunConfig(problem="alfven2.5d", nx=8, ny=8, cfl=0.3))
    assert config.ny == 8
    assert config.cfl == 0.3


def test_dimension_mismatch_is_a_config_error():
    with pytest.raises(ConfigError):
        resolve_defaults(RunConfig(problem="alfven2.5d", nx=8, nz=4))


def test_alfven_domain_and_uniform_background():
    state, problem, config = setup_problem(RunConfig(problem="alfven2.5d", nx=16, output_formats=[]))
    phi = np.arctan(0.5)
    assert problem.upper == pytest.approx((1.0 / np.cos(phi), 1.0 / np.sin(phi)))
    assert state.grid.dims == (16, 32)
    q = state.interior_q
    assert np.allclose(q[RHO], 1.0)
    assert np.allclose(pressure(q), 0.1, atol=1e-3)


def test_alfven_potential_reproduces_the_field():
    state, problem, config = setup_problem(RunConfig(problem="alfven2.5d", nx=16, output_formats=[]))
    components = problem.components(config.ct25d_full)
    polys = reconstruct(state.a[list(components)], LeastSquaresReconstruction(state.grid))
    B = curl_of_potential(polys, state.grid, components)
    assert np.max(np.abs(B - state.magnetic_field)) < 1e-2


def test_periodic_jumps_come_from_the_linear_part():
    problem = get_problem("alfven2.5d")
    jumps = problem.potential_jumps()
    length = problem.upper[0] - problem.lower[0]
    n = np.array([np.cos(np.arctan(0.5)), np.sin(np.arctan(0.5))])
    assert jumps[0][2] == pytest.approx(-length * n[1])
    assert jumps[1][2] == pytest.approx((problem.upper[1] - problem.lower[1]) * n[0])


def test_shocktube_left_state():
    state, _, _ = setup_problem(RunConfig(problem="shocktube", nx=8, output_formats=[]))
    q = state.interior_q
    left = q[:, 0, 0]
    assert left[RHO] == pytest.approx(SHOCKTUBE_LEFT[0])
    assert left[1] == pytest.approx(1.08 * 1.2)
    assert left[BX] == pytest.approx(2.0 / np.sqrt(4 * np.pi))


def test_cloud_centre_is_dense():
    state, problem, _ = setup_problem(RunConfig(problem="cloudshock2.5d", nx=20, grid="cartesian",
                                                output_formats=[]))
    q = state.interior_q
    centre = tuple(int(c * 20) for c in problem.center)
    assert q[(RHO,) + centre] == pytest.approx(CLOUD_DENSITY)
    assert q[RHO, 0, 10] == pytest.approx(3.86859)
    assert q[BZ, -1, 10] == pytest.approx(0.56418958)


def test_hat_profile_shape():
    x = np.array([0.1, 0.25, 0.325, 0.5, 0.675, 0.75, 0.9])
    assert np.allclose(hat_profile(x), [0.0, 0.0, 1.0, 2.0, 1.0, 0.0, 0.0])
