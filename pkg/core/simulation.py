"""
Simulation - one run from configuration to output files
"""
import logging
from pathlib import Path
from typing import List, Optional

import pandas as pd

from config.settings import RunConfig
from core.errors import SolverError
from core.output import write_diagnostics, write_output
from core.problems import ProblemSpec, setup_problem
from core.timestepper import ConstrainedTransportSolver, SimulationState

logger = logging.getLogger(__name__)


class SimulationResult:
    def __init__(self, state: SimulationState, problem: ProblemSpec, config: RunConfig,
                 diagnostics: pd.DataFrame, paths: List[Path]):
        self.state = state
        self.problem = problem
        self.config = config
        self.diagnostics = diagnostics
        self.paths = paths


def run_simulation(config: RunConfig, write: bool = True, t_final: Optional[float] = None) -> SimulationResult:
    """
    Set up, advance and write one run

    Args:
        config: Run configuration
        write: Write snapshots and the diagnostics table
        t_final: Override of the configured end time

    Returns:
        SimulationResult with the final state and per-step diagnostics

    Raises:
        SolverError: after flushing the last good state and the diagnostics
    """
    state, problem, config = setup_problem(config)
    solver = ConstrainedTransportSolver(state.grid, problem, config)
    end = config.t_final if t_final is None else t_final
    formats = config.output_formats if write else []
    paths: List[Path] = []
    latest = {"state": state}

    def on_step(current: SimulationState):
        latest["state"] = current
        if formats and config.output_every and current.step % config.output_every == 0:
            paths.extend(write_output(current, problem.name, config.output_dir, formats))

    if formats and config.output_every:
        paths.extend(write_output(solver.fill_ghosts(state), problem.name, config.output_dir, formats))

    try:
        final = solver.advance(state, end, callback=on_step)
    except SolverError as exc:
        logger.error(f"❌ {problem.name} aborted at t={latest['state'].t:.6g} "
                     f"(step {latest['state'].step}): {exc}")
        if write:
            _flush(latest["state"], solver, problem, config, formats, paths)
        raise

    if formats and not (config.output_every and final.step % config.output_every == 0):
        paths.extend(write_output(final, problem.name, config.output_dir, formats))
    diagnostics = solver.diagnostics_frame()
    if write:
        paths.append(write_diagnostics(diagnostics, config.output_dir, problem.name, final.grid.dims))
    logger.info(f"✅ {problem.name} finished: t={final.t:.6g} after {final.step} steps")
    return SimulationResult(final, problem, config, diagnostics, paths)


def _flush(state: SimulationState, solver: ConstrainedTransportSolver, problem: ProblemSpec,
           config: RunConfig, formats, paths: List[Path]):
    try:
        if formats:
            paths.extend(write_output(state, problem.name, config.output_dir, formats))
        paths.append(write_diagnostics(solver.diagnostics_frame(), config.output_dir, problem.name,
                                       state.grid.dims))
    except SolverError as exc:
        logger.error(f"Could not flush partial results: {exc}")
