"""
Convergence - L1 errors and experimental orders under 2:1 refinement
"""
import logging
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel
from rich.console import Console
from rich.table import Table

from config.settings import RunConfig
from core.errors import ConfigError
from core.geometry import MappedGrid, cell_averages
from core.mhd import VARIABLE_NAMES, pressure
from core.problems import ProblemSpec, get_problem, resolve_defaults
from core.reference import reference_1d_solution, reference_problem, sample_reference
from core.simulation import run_simulation
from core.timestepper import SimulationState

logger = logging.getLogger(__name__)

EXACT_QUADRATURE = 5
REFERENCE_VARIABLES = ("Bx", "By", "Bz", "rho", "p")


def l1_error(values: np.ndarray, exact: np.ndarray, grid: MappedGrid) -> np.ndarray:
    """
    Volume-weighted L1 error per variable

    Args:
        values: (nvar, *dims) computed cell averages
        exact: (nvar, *dims) exact cell averages
        grid: Grid the fields live on

    Returns:
        (nvar,) values of sum |C| |Q - exact| / sum |C|
    """
    if values.shape != exact.shape or values.shape[1:] != grid.dims:
        raise ValueError(f"Field shape {values.shape} does not match exact {exact.shape} on grid {grid.dims}")
    volume = grid.interior_volume()
    error = np.abs(values - exact).reshape(values.shape[0], -1)
    return np.einsum("vi,i->v", error, volume.ravel()) / volume.sum()


def eoc(coarse: np.ndarray, fine: np.ndarray) -> np.ndarray:
    """log2(e_coarse / e_fine) for a 2:1 refinement."""
    coarse, fine = np.asarray(coarse, dtype=float), np.asarray(fine, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log2(coarse / fine)


class ConvergenceReport(BaseModel):
    """L1 errors per resolution and the orders between consecutive levels."""
    problem: str
    resolutions: List[str]
    variables: List[str]
    errors: List[List[float]]

    @property
    def orders(self) -> List[List[float]]:
        return [eoc(c, f).tolist() for c, f in zip(self.errors[:-1], self.errors[1:])]

    def final_orders(self) -> Dict[str, float]:
        """Orders from the two finest grids."""
        if len(self.errors) < 2:
            return {}
        return dict(zip(self.variables, self.orders[-1]))

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for label, errors in zip(self.resolutions, self.errors):
            rows.append({"grid": label, **dict(zip(self.variables, errors))})
        if len(self.errors) >= 2:
            rows.append({"grid": "EOC", **self.final_orders()})
        return pd.DataFrame(rows)

    def render(self, console: Optional[Console] = None):
        table = Table(title=f"L1 errors: {self.problem}")
        table.add_column("grid")
        for name in self.variables:
            table.add_column(name, justify="right")
        for label, errors in zip(self.resolutions, self.errors):
            table.add_row(label, *(f"{e:.3e}" for e in errors))
        if len(self.errors) >= 2:
            table.add_row("EOC", *(f"{o:.2f}" for o in self.orders[-1]), style="bold")
        (console or Console()).print(table)


def _exact_fields(problem: ProblemSpec, state: SimulationState, components: Sequence[int]):
    names, fields, exact = [], [], []
    grid = state.grid
    if problem.exact is not None and state.q is not None:
        names += list(VARIABLE_NAMES)
        fields.append(state.interior_q)
        exact.append(cell_averages(lambda x: problem.exact(x, state.t), grid, n=EXACT_QUADRATURE))
    if problem.exact_potential is not None:
        names += [f"A{c + 1}" for c in components]
        fields.append(state.interior_a[list(components)])
        averages = cell_averages(lambda x: problem.exact_potential(x, state.t), grid, n=EXACT_QUADRATURE)
        exact.append(averages[list(components)])
    return names, fields, exact


def _reference_fields(problem: ProblemSpec, state: SimulationState, reference: pd.DataFrame):
    grid = state.grid
    q = state.interior_q
    x = grid.centroid[(0,) + grid.interior]
    computed = {"Bx": q[5], "By": q[6], "Bz": q[7], "rho": q[0], "p": pressure(q)}
    fields = np.stack([computed[name] for name in REFERENCE_VARIABLES])
    exact = np.stack([sample_reference(reference, x, name) for name in REFERENCE_VARIABLES])
    return list(REFERENCE_VARIABLES), [fields], [exact]


def measure_errors(problem: ProblemSpec, state: SimulationState, components: Sequence[int],
                   reference: Optional[pd.DataFrame] = None):
    if problem.exact is not None or problem.exact_potential is not None:
        names, fields, exact = _exact_fields(problem, state, components)
    elif reference is not None:
        names, fields, exact = _reference_fields(problem, state, reference)
    else:
        raise ValueError(f"Problem '{problem.name}' has neither an exact solution nor a reference")
    return names, l1_error(np.concatenate(fields), np.concatenate(exact), state.grid)


def run_convergence(config: RunConfig, runner: Callable = run_simulation) -> ConvergenceReport:
    """
    Run config.levels grids, each twice as fine as the previous one

    Args:
        config: Base configuration (coarsest grid)
        runner: Simulation entry point, replaceable in tests

    Returns:
        ConvergenceReport with errors per level and orders
    """
    problem = get_problem(config.problem)
    base = resolve_defaults(config, problem)
    reference = None
    if problem.exact is None and problem.exact_potential is None:
        if reference_problem(problem.name) is None:
            raise ConfigError("problem", f"'{problem.name}' has neither an exact solution nor a 1D reference")
        reference = reference_1d_solution(problem.name, cells=base.reference_cells, t_final=base.t_final,
                                          cfl=base.cfl, weno=base.weno)

    resolutions, errors, names = [], [], []
    for level in range(base.levels):
        factor = 2 ** level
        dims = {"nx": base.nx * factor}
        if base.ny is not None:
            dims["ny"] = base.ny * factor
        if base.nz is not None:
            dims["nz"] = base.nz * factor
        level_config = base.model_copy(update=dims)
        result = runner(level_config, write=False)
        components = problem.components(bool(level_config.ct25d_full))
        names, level_errors = measure_errors(problem, result.state, components, reference)
        label = "x".join(str(n) for n in result.state.grid.dims)
        resolutions.append(label)
        errors.append([float(e) for e in level_errors])
        logger.info(f"{problem.name} {label}: " + ", ".join(f"{n}={e:.3e}" for n, e in zip(names, level_errors)))

    return ConvergenceReport(problem=problem.name, resolutions=resolutions, variables=names, errors=errors)
