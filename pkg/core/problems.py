"""
Problems - registry of test problems and their initial data

Each ProblemSpec bundles the domain, boundary rules, default run parameters
and pointwise initial data. setup_problem turns a ProblemSpec plus a RunConfig into
a SimulationState whose cell averages come from 5-point Gauss quadrature.
"""
import logging
from typing import Callable, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from config.settings import RunConfig
from core.boundaries import INFLOW, LINEAR, OUTFLOW, PERIODIC, PERIODIC_SHIFT
from core.errors import ConfigError, FoldedGridError
from core.geometry import GridDescriptor, build_grid, cell_averages
from core.mhd import NVAR, conserved_from_primitive
from core.timestepper import SimulationState

logger = logging.getLogger(__name__)

INITIAL_QUADRATURE = 5
FOUR_PI_ROOT = np.sqrt(4.0 * np.pi)

Mode = Literal["advect1d", "mhd1d", "2.5d", "3d"]
PointFunction = Callable[[np.ndarray], np.ndarray]


class ProblemSpec(BaseModel):
    """Static description of one test problem."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str
    mode: Mode
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    aspect: Tuple[int, ...] = (1,)
    periodic: Tuple[bool, ...]
    mhd_rules: Tuple[Tuple[str, str], ...] = ()
    potential_rules: Tuple[Tuple[str, str], ...] = ()
    cfl: float
    t_final: float
    grid: str = "cartesian"
    beta: float = 0.0
    center: Optional[Tuple[float, ...]] = None
    ct25d_full: bool = False
    eta_mode: str = "mhd"
    advection_velocity: Optional[Tuple[float, float, float]] = None
    primitive: Optional[Callable] = None
    potential: Optional[Callable] = None
    exact: Optional[Callable] = None
    exact_potential: Optional[Callable] = None
    linear_potential: Optional[Callable] = None

    @property
    def ndim(self) -> int:
        return len(self.lower)

    @property
    def has_mhd(self) -> bool:
        return self.mode != "advect1d"

    @property
    def has_potential(self) -> bool:
        return self.mode in ("advect1d", "2.5d", "3d")

    def components(self, ct25d_full: bool) -> Tuple[int, ...]:
        """Evolved components of A."""
        if self.mode == "3d" or (self.mode == "2.5d" and ct25d_full):
            return (0, 1, 2)
        return (2,)

    def potential_jumps(self) -> Optional[List[np.ndarray]]:
        """Constant jumps A(x + L e_d) - A(x) of the linear part of A per axis."""
        if self.linear_potential is None:
            return None
        origin = np.zeros((self.ndim, 1))
        base = self.linear_potential(origin)[:, 0]
        jumps = []
        for axis in range(self.ndim):
            shifted = origin.copy()
            shifted[axis] = self.upper[axis] - self.lower[axis]
            jumps.append(self.linear_potential(shifted)[:, 0] - base)
        return jumps


# ---------------------------------------------------------------------------
# Circularly polarised Alfven wave
# ---------------------------------------------------------------------------

ALFVEN_AMPLITUDE = 0.1
ALFVEN_DENSITY = 1.0
ALFVEN_PRESSURE = 0.1


def _alfven_frame(ndim: int):
    if ndim == 2:
        phi = np.arctan(0.5)
        n = np.array([np.cos(phi), np.sin(phi), 0.0])
        t1 = np.array([-np.sin(phi), np.cos(phi), 0.0])
    else:
        n = np.array([1.0, 0.5, 0.5]) / np.sqrt(1.5)
        t1 = np.array([-n[1], n[0], 0.0])
        t1 /= np.linalg.norm(t1)
    return n, t1, np.cross(n, t1)


def _embed(x: np.ndarray) -> np.ndarray:
    """Points (d, ...) as 3-vectors with missing coordinates 0."""
    if x.shape[0] == 3:
        return x
    return np.concatenate([x, np.zeros((3 - x.shape[0],) + x.shape[1:])])


def _bcast(vector: np.ndarray, like: np.ndarray) -> np.ndarray:
    return vector.reshape((3,) + (1,) * like.ndim)


def _alfven_phase(x: np.ndarray, t: float, n: np.ndarray) -> np.ndarray:
    return np.einsum("d,d...->...", n[: x.shape[0]], x) + t


def _alfven_primitive(ndim: int) -> Callable[[np.ndarray, float], np.ndarray]:
    n, t1, t2 = _alfven_frame(ndim)

    def state(x, t=0.0):
        s = _alfven_phase(x, t, n)
        transverse = (ALFVEN_AMPLITUDE * np.sin(2 * np.pi * s)[None] * _bcast(t1, s)
                      + ALFVEN_AMPLITUDE * np.cos(2 * np.pi * s)[None] * _bcast(t2, s))
        w = np.empty((NVAR,) + s.shape)
        w[0] = ALFVEN_DENSITY
        w[1:4] = transverse
        w[4] = ALFVEN_PRESSURE
        w[5:8] = _bcast(n, s) + transverse
        return w

    return state


def _linear_potential(field: np.ndarray) -> PointFunction:
    """A = (0, x B3, y B1 - x B2) for a uniform field B."""

    def potential(x):
        p = _embed(x)
        return np.stack([np.zeros_like(p[0]), p[0] * field[2], p[1] * field[0] - p[0] * field[1]])

    return potential


def _alfven_potential(ndim: int) -> Callable[[np.ndarray, float], np.ndarray]:
    n, t1, t2 = _alfven_frame(ndim)
    linear = _linear_potential(n)

    def potential(x, t=0.0):
        s = _alfven_phase(x, t, n)
        a1 = ALFVEN_AMPLITUDE * np.sin(2 * np.pi * s) / (2 * np.pi)
        a2 = ALFVEN_AMPLITUDE * np.cos(2 * np.pi * s) / (2 * np.pi)
        return linear(x) + a1[None] * _bcast(t1, s) + a2[None] * _bcast(t2, s)

    return potential


def _exact_conserved(primitive) -> Callable[[np.ndarray, float], np.ndarray]:
    return lambda x, t: conserved_from_primitive(primitive(x, t))


# ---------------------------------------------------------------------------
# Shock tube and cloud-shock data
# ---------------------------------------------------------------------------

SHOCKTUBE_LEFT = np.array([1.08, 1.2, 0.01, 0.5, 0.95, 2.0 / FOUR_PI_ROOT, 3.6 / FOUR_PI_ROOT, 2.0 / FOUR_PI_ROOT])
SHOCKTUBE_RIGHT = np.array([1.0, 0.0, 0.0, 0.0, 1.0, 2.0 / FOUR_PI_ROOT, 4.0 / FOUR_PI_ROOT, 2.0 / FOUR_PI_ROOT])

CLOUD_SHOCK_POSITION = 0.05
CLOUD_LEFT = np.array([3.86859, 11.2536, 0.0, 0.0, 167.345, 0.0, 2.1826182, -2.1826182])
CLOUD_RIGHT = np.array([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.56418958, 0.56418958])
CLOUD_DENSITY = 10.0
CLOUD_RADIUS = 0.15
CLOUD_SLICE = 0.5


def _riemann_primitive(left: np.ndarray, right: np.ndarray, position: float) -> PointFunction:
    def state(x):
        on_left = x[0] < position
        return np.where(on_left[None], left.reshape((-1,) + (1,) * on_left.ndim),
                        right.reshape((-1,) + (1,) * on_left.ndim))

    return state


def _shocktube_potential(x):
    on_left = x[0] < 0.0
    lin_left = _linear_potential(SHOCKTUBE_LEFT[5:])(x)
    lin_right = _linear_potential(SHOCKTUBE_RIGHT[5:])(x)
    return np.where(on_left[None], lin_left, lin_right)


def _cloud_center(ndim: int) -> np.ndarray:
    return np.array([0.25, 0.5, 0.5][:ndim])


def _cloud_primitive(ndim: int) -> PointFunction:
    shock = _riemann_primitive(CLOUD_LEFT, CLOUD_RIGHT, CLOUD_SHOCK_POSITION)
    center = _cloud_center(ndim)

    def state(x):
        w = shock(x)
        rel = x - center.reshape((-1,) + (1,) * (x.ndim - 1))
        inside = np.sum(rel ** 2, axis=0) < CLOUD_RADIUS ** 2
        w[0] = np.where(inside, CLOUD_DENSITY, w[0])
        return w

    return state


def _cloud_potential(x):
    p = _embed(x)
    if x.shape[0] == 2:
        p[2] = CLOUD_SLICE
    offset = p[0] - CLOUD_SHOCK_POSITION
    on_left = (p[0] < CLOUD_SHOCK_POSITION)[None]
    left = np.stack([CLOUD_LEFT[6] * p[1], np.zeros_like(p[0]), -CLOUD_LEFT[6] * offset])
    right = np.stack([-CLOUD_RIGHT[6] * p[1], np.zeros_like(p[0]), -CLOUD_RIGHT[6] * offset])
    return np.where(on_left, left, right)


# ---------------------------------------------------------------------------
# 1D advection profiles (stored in the third potential component)
# ---------------------------------------------------------------------------

def hat_profile(x: np.ndarray) -> np.ndarray:
    """Continuous piecewise-linear hat with kinks at 0.25, 0.4, 0.6 and 0.75."""
    x = np.mod(x, 1.0)
    return np.clip(np.minimum((x - 0.25) / 0.075, (0.75 - x) / 0.075), 0.0, 2.0)


def hat_derivative(x: np.ndarray) -> np.ndarray:
    x = np.mod(x, 1.0)
    return np.where((x > 0.25) & (x < 0.4), 1.0 / 0.075, np.where((x > 0.6) & (x < 0.75), -1.0 / 0.075, 0.0))


def _advected(profile: Callable[[np.ndarray], np.ndarray]) -> Callable[[np.ndarray, float], np.ndarray]:
    def potential(x, t=0.0):
        q = profile(x[0] - t)
        return np.stack([np.zeros_like(q), np.zeros_like(q), q])

    return potential


def _sine_profile(x):
    return np.sin(2.0 * np.pi * x)


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

def _alfven_spec(name: str, ndim: int) -> ProblemSpec:
    n, _, _ = _alfven_frame(ndim)
    primitive = _alfven_primitive(ndim)
    potential = _alfven_potential(ndim)
    periodic = ((PERIODIC_SHIFT, PERIODIC_SHIFT),) * ndim
    return ProblemSpec(
        name=name,
        mode="2.5d" if ndim == 2 else "3d",
        lower=(0.0,) * ndim,
        upper=tuple(1.0 / n[d] for d in range(ndim)),
        aspect=(1, 2) if ndim == 2 else (1, 2, 2),
        periodic=(True,) * ndim,
        mhd_rules=((PERIODIC, PERIODIC),) * ndim,
        potential_rules=periodic,
        cfl=0.5 if ndim == 2 else 0.6,
        t_final=1.0,
        ct25d_full=True,
        primitive=lambda x: primitive(x, 0.0),
        potential=lambda x: potential(x, 0.0),
        exact=_exact_conserved(primitive),
        exact_potential=potential,
        linear_potential=_linear_potential(n),
    )


def _shocktube_spec() -> ProblemSpec:
    outflow = ((OUTFLOW, OUTFLOW),) * 2
    return ProblemSpec(
        name="shocktube",
        mode="2.5d",
        lower=(-0.7, -0.7),
        upper=(0.7, 0.7),
        aspect=(1, 1),
        periodic=(False, False),
        mhd_rules=outflow,
        potential_rules=((LINEAR, LINEAR),) * 2,
        cfl=0.5,
        t_final=0.2,
        grid="shocktube-blend",
        beta=1.0 / 15.0,
        primitive=_riemann_primitive(SHOCKTUBE_LEFT, SHOCKTUBE_RIGHT, 0.0),
        potential=_shocktube_potential,
    )


def _shocktube1d_spec() -> ProblemSpec:
    return ProblemSpec(
        name="shocktube1d",
        mode="mhd1d",
        lower=(-0.7,),
        upper=(0.7,),
        periodic=(False,),
        mhd_rules=((OUTFLOW, OUTFLOW),),
        cfl=0.5,
        t_final=0.2,
        primitive=_riemann_primitive(SHOCKTUBE_LEFT, SHOCKTUBE_RIGHT, 0.0),
    )


def _cloud_spec(name: str, ndim: int) -> ProblemSpec:
    mhd_rules = ((INFLOW, OUTFLOW),) + ((OUTFLOW, OUTFLOW),) * (ndim - 1)
    return ProblemSpec(
        name=name,
        mode="2.5d" if ndim == 2 else "3d",
        lower=(0.0,) * ndim,
        upper=(1.0,) * ndim,
        aspect=(1,) * ndim,
        periodic=(False,) * ndim,
        mhd_rules=mhd_rules,
        potential_rules=((LINEAR, LINEAR),) * ndim,
        cfl=0.5 if ndim == 2 else 0.6,
        t_final=0.06,
        beta=0.35,
        center=tuple(_cloud_center(ndim)),
        ct25d_full=True,
        primitive=_cloud_primitive(ndim),
        potential=_cloud_potential,
    )


def _advection_spec(name: str, profile) -> ProblemSpec:
    potential = _advected(profile)
    return ProblemSpec(
        name=name,
        mode="advect1d",
        lower=(0.0,),
        upper=(1.0,),
        periodic=(True,),
        potential_rules=((PERIODIC, PERIODIC),),
        cfl=0.7,
        t_final=1.0,
        eta_mode="advection",
        advection_velocity=(1.0, 0.0, 0.0),
        potential=lambda x: potential(x, 0.0),
        exact_potential=potential,
    )


PROBLEMS: Dict[str, ProblemSpec] = {
    spec.name: spec for spec in (
        _alfven_spec("alfven2.5d", 2),
        _alfven_spec("alfven3d", 3),
        _shocktube_spec(),
        _shocktube1d_spec(),
        _cloud_spec("cloudshock2.5d", 2),
        _cloud_spec("cloudshock3d", 3),
        _advection_spec("advect1d", hat_profile),
        _advection_spec("advect1d-sine", _sine_profile),
    )
}


def get_problem(name: str) -> ProblemSpec:
    try:
        return PROBLEMS[name]
    except KeyError:
        raise ConfigError("problem", f"unknown problem '{name}' (known: {', '.join(sorted(PROBLEMS))})") from None


def resolve_defaults(config: RunConfig, problem: Optional[ProblemSpec] = None) -> RunConfig:
    """
    Fill the problem-dependent defaults the config leaves open

    Args:
        config: Validated run configuration
        problem: The problem; looked up from config.problem when omitted

    Returns:
        A new RunConfig; explicit values are never overridden
    """
    problem = problem or get_problem(config.problem)
    updates = {}
    if problem.ndim >= 2 and config.ny is None:
        updates["ny"] = config.nx * problem.aspect[1]
    if problem.ndim == 3 and config.nz is None:
        updates["nz"] = config.nx * problem.aspect[2]
    if problem.ndim < 3 and config.nz is not None:
        raise ConfigError("nz", f"problem '{problem.name}' is {problem.ndim}-dimensional")
    if problem.ndim < 2 and config.ny is not None:
        raise ConfigError("ny", f"problem '{problem.name}' is one-dimensional")
    for key in ("cfl", "t_final", "grid", "beta", "ct25d_full"):
        if getattr(config, key) is None:
            updates[key] = getattr(problem, key)
    if config.limiter.eta_mode is None:
        updates["limiter"] = config.limiter.model_copy(update={"eta_mode": problem.eta_mode})
    return config.model_copy(update=updates)


def grid_descriptor(config: RunConfig, problem: ProblemSpec) -> GridDescriptor:
    dims = (config.nx, config.ny, config.nz)[: problem.ndim]
    return GridDescriptor(
        kind=config.grid or problem.grid,
        dims=dims,
        lower=problem.lower,
        upper=problem.upper,
        beta=problem.beta if config.beta is None else config.beta,
        periodic=problem.periodic,
        quadrature=config.quadrature,
        center=problem.center,
        radius=CLOUD_RADIUS,
    )


def setup_problem(config: RunConfig):
    """
    Build the grid and the initial SimulationState of a run

    Args:
        config: Run configuration (defaults are resolved here)

    Returns:
        (SimulationState, ProblemSpec, RunConfig with defaults resolved)

    Raises:
        ConfigError: unknown problem name, dimension mismatch or a beta that folds the grid
    """
    problem = get_problem(config.problem)
    config = resolve_defaults(config, problem)
    try:
        grid = build_grid(grid_descriptor(config, problem))
    except FoldedGridError as exc:
        raise ConfigError("beta", f"{config.beta} folds the {config.grid} grid ({exc})") from exc

    q = None
    if problem.has_mhd:
        q = cell_averages(lambda x: conserved_from_primitive(problem.primitive(x)), grid,
                          n=INITIAL_QUADRATURE, padded=True)
    a = np.zeros((3,) + grid.padded)
    if problem.has_potential:
        a = cell_averages(problem.potential, grid, n=INITIAL_QUADRATURE, padded=True)

    logger.info(f"Set up {problem.name} on {'x'.join(map(str, grid.dims))} cells "
                f"(grid={grid.descriptor.kind}, t_final={config.t_final}, cfl={config.cfl})")
    state = SimulationState(grid=grid, q=q, a=a, t=0.0, step=0)
    return state, problem, config
