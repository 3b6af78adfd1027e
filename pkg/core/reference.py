"""
Reference - fine-grid 1D solutions for the shock tube comparison
"""
import logging
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from config.settings import RunConfig
from core.errors import OutputError
from core.mhd import BX, BY, BZ, RHO, pressure
from core.problems import get_problem
from core.simulation import run_simulation

logger = logging.getLogger(__name__)

REFERENCE_PROBLEMS = {"shocktube": "shocktube1d", "shocktube1d": "shocktube1d"}
REFERENCE_COLUMNS = ["x", "Bx", "By", "Bz", "rho", "p"]


def reference_problem(name: str) -> Optional[str]:
    return REFERENCE_PROBLEMS.get(name)


@lru_cache(maxsize=4)
def _cached_reference(problem: str, cells: int, t_final: float, cfl: float, weno: bool) -> pd.DataFrame:
    config = RunConfig(problem=problem, nx=cells, t_final=t_final, cfl=cfl, weno=weno,
                       output_formats=[], output_every=0)
    result = run_simulation(config, write=False)
    state = result.state
    q = state.interior_q
    x = state.grid.centroid[(0,) + state.grid.interior]
    return pd.DataFrame({
        "x": x,
        "Bx": q[BX],
        "By": q[BY],
        "Bz": q[BZ],
        "rho": q[RHO],
        "p": pressure(q),
    })


def reference_1d_solution(problem: str = "shocktube", cells: int = 10_000, t_final: Optional[float] = None,
                          cfl: float = 0.5, weno: bool = True) -> pd.DataFrame:
    """
    Solve the 1D version of a problem on a fine equidistant grid

    Args:
        problem: Problem whose 1D counterpart is solved
        cells: Number of cells
        t_final: End time (the 1D problem's default when None)
        cfl: CFL number
        weno: Use the limited reconstruction

    Returns:
        DataFrame with columns x, Bx, By, Bz, rho, p at cell centres
    """
    name = reference_problem(problem)
    if name is None:
        raise ValueError(f"No 1D reference is defined for problem '{problem}'")
    if t_final is None:
        t_final = get_problem(name).t_final
    logger.info(f"Computing 1D reference for {problem} on {cells} cells to t={t_final}")
    return _cached_reference(name, int(cells), float(t_final), float(cfl), bool(weno)).copy()


def sample_reference(reference: pd.DataFrame, x: np.ndarray, column: str) -> np.ndarray:
    """Linear interpolation of one reference column at positions x."""
    return np.interp(x, reference["x"].to_numpy(), reference[column].to_numpy())


def write_reference(reference: pd.DataFrame, path) -> Path:
    """Write `x Bx By Bz rho p` as whitespace-separated columns with a header line."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        reference[REFERENCE_COLUMNS].to_csv(path, sep=" ", index=False, float_format="%.10e")
    except OSError as exc:
        raise OutputError(path, exc.strerror or str(exc)) from exc
    logger.info(f"✅ Wrote reference profile to {path}")
    return path
