"""
Timestepper - SSP-RK3 with a constrained-transport corrector in every stage

Each stage advances the conserved MHD variables with L1 and the vector
potential with L2 (velocity from the previous stage), then overwrites the
magnetic field with the curl of the new potential.
"""
import logging
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from config.settings import RunConfig, settings
from core.boundaries import apply_boundaries
from core.curl import curl_of_potential, divergence_diagnostic
from core.errors import PositivityError
from core.geometry import MappedGrid
from core.mhd import (FIELD, VARIABLE_NAMES, check_admissible, mhd_rhs, pressure,
                      primitive_from_conserved, wave_speeds)
from core.potential import VelocityField, potential_rhs
from core.reconstruction import CellPolynomials, LeastSquaresReconstruction, reconstruct
from core.resistivity import LimiterParams, epsilon_field

logger = logging.getLogger(__name__)


class StageCoefficients(NamedTuple):
    """Q(k) = alpha Q(n) + (1 - alpha) Q(k-1) + beta dt L(Q(k-1))."""
    alpha: float
    beta: float


SSP_RK3 = (StageCoefficients(1.0, 1.0), StageCoefficients(0.75, 0.25), StageCoefficients(1.0 / 3.0, 2.0 / 3.0))
FORWARD_EULER = (StageCoefficients(1.0, 1.0),)
INTEGRATORS = {"ssprk3": SSP_RK3, "euler": FORWARD_EULER}


class SimulationState:
    """
    Grid functions of one time level

    q: (8, *padded) conserved variables, or None for pure advection runs
    a: (3, *padded) vector potential (the 1D advection runs carry their
       scalar in the third component)
    """

    def __init__(self, grid: MappedGrid, q: Optional[np.ndarray], a: np.ndarray, t: float = 0.0, step: int = 0):
        self.grid = grid
        self.q = q
        self.a = a
        self.t = t
        self.step = step
        self.a_polynomials: Optional[CellPolynomials] = None

    def copy(self) -> "SimulationState":
        return SimulationState(self.grid, None if self.q is None else self.q.copy(), self.a.copy(), self.t, self.step)

    @property
    def interior_q(self) -> Optional[np.ndarray]:
        if self.q is None:
            return None
        return self.q[(slice(None),) + self.grid.interior]

    @property
    def interior_a(self) -> np.ndarray:
        return self.a[(slice(None),) + self.grid.interior]

    @property
    def magnetic_field(self) -> np.ndarray:
        return self.interior_q[FIELD]


class ConstrainedTransportSolver:
    """
    Drives one problem on one grid

    Args:
        grid: The grid shared by all fields
        problem: ProblemSpec with boundary rules and the evolution mode
        config: Run configuration with problem defaults resolved
    """

    def __init__(self, grid: MappedGrid, problem, config: RunConfig):
        self.grid = grid
        self.problem = problem
        self.config = config
        self.mode = problem.mode
        self.components = problem.components(bool(config.ct25d_full))
        self.stages = INTEGRATORS[config.integrator]
        self.operator = LeastSquaresReconstruction(grid, weno=config.weno)
        self.limiter = LimiterParams.from_config(config.limiter, problem.eta_mode) if config.limiter.enabled else None
        self.jumps = problem.potential_jumps()
        self.frozen_q: Optional[np.ndarray] = None
        self.history: List[Dict[str, float]] = []
        self.constant_velocity = None
        if problem.advection_velocity is not None:
            self.constant_velocity = VelocityField.constant(problem.advection_velocity, grid)

    @property
    def evolves_potential(self) -> bool:
        return self.problem.has_potential

    @property
    def corrects(self) -> bool:
        return self.config.corrector and self.mode in ("2.5d", "3d")

    def fill_ghosts(self, state: SimulationState) -> SimulationState:
        if state.q is not None:
            if self.frozen_q is None:
                self.frozen_q = state.q.copy()
            apply_boundaries(state.q, self.grid, self.problem.mhd_rules, frozen=self.frozen_q)
        if self.evolves_potential:
            apply_boundaries(state.a, self.grid, self.problem.potential_rules, jumps=self.jumps)
        return state

    # -- step size -----------------------------------------------------------

    def compute_dt(self, state: SimulationState, t_final: Optional[float] = None) -> float:
        """
        dt = cfl * min over cells of ds / s_max, truncated to land on t_final

        s_max is the largest |u.n| + c_f over the face directions of a cell;
        dt_max caps the result (and is used when nothing moves).
        """
        grid, cfl = self.grid, self.config.cfl
        ds = grid.ds[grid.interior]
        speed = np.zeros(grid.dims)
        w = primitive_from_conserved(state.interior_q) if state.q is not None else None
        for axis in range(grid.ndim):
            lower_faces = tuple(slice(grid.ng, grid.ng + n) for n in grid.dims)
            n = grid.faces[axis]["normals"][(slice(None), 0) + lower_faces]
            if w is not None:
                local = np.abs(np.sum(w[1:4] * n, axis=0)) + wave_speeds(w, n).fast
            else:
                u = np.asarray(self.problem.advection_velocity, dtype=float).reshape((3,) + (1,) * grid.ndim)
                local = np.abs(np.sum(u * n, axis=0))
            speed = np.maximum(speed, local)

        moving = speed > 0
        dt = float(cfl * np.min(ds[moving] / speed[moving])) if np.any(moving) else self.config.dt_max
        dt = min(dt, self.config.dt_max)
        if t_final is not None:
            dt = min(dt, t_final - state.t)
        return dt

    # -- stages --------------------------------------------------------------

    def _potential_polynomials(self, state: SimulationState) -> CellPolynomials:
        if state.a_polynomials is None:
            state.a_polynomials = reconstruct(state.a[list(self.components)], self.operator)
        return state.a_polynomials

    def ct_stage(self, previous: SimulationState, start: SimulationState, coeffs: StageCoefficients,
                 dt: float, stage: int = 1) -> SimulationState:
        """
        One predictor/corrector stage

        Args:
            previous: State (k-1) with ghosts filled
            start: State at the beginning of the step
            coeffs: Stage weights
            dt: Step size, frozen for the whole step
            stage: 1-based stage number for diagnostics

        Returns:
            State (k) with ghosts filled

        Raises:
            PositivityError: if a cell average or a reconstructed node value loses positivity
        """
        grid = self.grid
        interior = grid.interior
        alpha, beta = coeffs
        new = start.copy()
        new.t, new.step = start.t, start.step

        velocity = self.constant_velocity
        if previous.q is not None:
            mhd_polys = reconstruct(previous.q, self.operator)
            try:
                rate = mhd_rhs(mhd_polys, grid)
                if self.evolves_potential and velocity is None:
                    velocity = VelocityField.from_polynomials(mhd_polys)
            except PositivityError as exc:
                raise PositivityError(exc.cell, exc.state, stage=stage, axis=exc.axis, node=exc.node) from exc
            sl = (slice(None),) + interior
            new.q[sl] = alpha * start.q[sl] + (1.0 - alpha) * previous.q[sl] + beta * dt * rate

        if self.evolves_potential:
            a_polys = self._potential_polynomials(previous)
            epsilon = epsilon_field(a_polys, grid, dt, self.limiter) if self.limiter else None
            rate = potential_rhs(a_polys, velocity, grid, self.components, self.config.potential_solver,
                                 dt=dt, epsilon=epsilon)
            sl = (list(self.components),) + interior
            new.a[sl] = alpha * start.a[sl] + (1.0 - alpha) * previous.a[sl] + beta * dt * rate

        self.fill_ghosts(new)
        if self.corrects:
            field = curl_of_potential(self._potential_polynomials(new), grid, self.components)
            corrected = (0, 1) if self.components == (2,) else (0, 1, 2)
            for c in corrected:
                new.q[(FIELD.start + c,) + interior] = field[c]
            self.fill_ghosts(new)

        if new.q is not None:
            check_admissible(new.interior_q, stage=stage)
        return new

    def step(self, state: SimulationState, dt: float) -> SimulationState:
        current = state
        for number, coeffs in enumerate(self.stages, start=1):
            current = self.ct_stage(current, state, coeffs, dt, stage=number)
        current.t = state.t + dt
        current.step = state.step + 1
        return current

    # -- diagnostics ---------------------------------------------------------

    def diagnostics(self, state: SimulationState, dt: float) -> Dict[str, float]:
        grid = self.grid
        volume = grid.interior_volume()
        row = {"step": state.step, "t": state.t, "dt": dt}
        if state.q is not None:
            q = state.interior_q
            for name, values in zip(VARIABLE_NAMES, q):
                row[f"total_{name}"] = float(np.sum(values * volume))
            if grid.ndim >= 2:
                stats = divergence_diagnostic(state.q[FIELD], grid)
                row["div_max"], row["div_l1"] = stats.max, stats.l1
            row["min_rho"] = float(q[0].min())
            row["min_p"] = float(pressure(q).min())
        if self.evolves_potential:
            for c in self.components:
                row[f"total_A{c + 1}"] = float(np.sum(state.interior_a[c] * volume))
        return row

    def diagnostics_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.history)

    # -- driver --------------------------------------------------------------

    def advance(self, state: SimulationState, t_final: float,
                callback: Optional[Callable[[SimulationState], None]] = None) -> SimulationState:
        """
        Step from state.t to t_final

        Args:
            state: Initial state (ghosts are filled here)
            t_final: End time
            callback: Called with every new state (output hooks)

        Returns:
            Final state; per-step diagnostics accumulate in self.history
        """
        self.fill_ghosts(state)
        if state.q is not None:
            check_admissible(state.interior_q)
        if not self.history:
            self.history.append(self.diagnostics(state, 0.0))
        if t_final <= state.t:
            return state

        progress = tqdm(total=t_final - state.t, desc=self.problem.name, unit="t",
                        disable=not settings.PROGRESS, leave=False)
        try:
            while state.t < t_final and state.step < self.config.max_steps:
                dt = self.compute_dt(state, t_final)
                if dt <= 0:
                    break
                state = self.step(state, dt)
                row = self.diagnostics(state, dt)
                self.history.append(row)
                logger.debug(f"step {state.step}: t={state.t:.6g} dt={dt:.3e}"
                             + (f" div_max={row['div_max']:.3e}" if "div_max" in row else ""))
                progress.update(dt)
                if callback is not None:
                    callback(state)
        finally:
            progress.close()

        if state.t < t_final:
            logger.warning(f"Stopped at t={state.t:.6g} after max_steps={self.config.max_steps}")
        return state


def compute_dt(solver: ConstrainedTransportSolver, state: SimulationState, t_final: Optional[float] = None) -> float:
    return solver.compute_dt(state, t_final)


def advance(solver: ConstrainedTransportSolver, state: SimulationState, t_final: float) -> Tuple[SimulationState, pd.DataFrame]:
    final = solver.advance(state, t_final)
    return final, solver.diagnostics_frame()
