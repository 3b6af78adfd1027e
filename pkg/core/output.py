"""
Output - CSV snapshots, legacy VTK files and x-scatter curves
"""
import logging
from pathlib import Path
from typing import Iterable, List

import numpy as np
import pandas as pd

from core.errors import OutputError
from core.mhd import BX, BY, BZ, ENERGY, MX, MY, MZ, RHO, pressure
from core.timestepper import SimulationState

logger = logging.getLogger(__name__)

STATE_COLUMNS = ["rho", "ux", "uy", "uz", "E", "Bx", "By", "Bz", "p", "A1", "A2", "A3"]
CURVE_VARIABLES = ["rho", "ux", "uy", "uz", "p", "Bx", "By", "Bz", "A3"]


def run_label(problem: str, dims) -> str:
    return f"{problem}_{'x'.join(str(n) for n in dims)}"


def snapshot_path(output_dir, problem: str, dims, step: int, extension: str) -> Path:
    return Path(output_dir) / f"{run_label(problem, dims)}_{step:06d}.{extension}"


def _cell_values(state: SimulationState) -> dict:
    values = {}
    a = state.interior_a
    if state.q is not None:
        q = state.interior_q
        values.update({
            "rho": q[RHO],
            "ux": q[MX] / q[RHO],
            "uy": q[MY] / q[RHO],
            "uz": q[MZ] / q[RHO],
            "E": q[ENERGY],
            "Bx": q[BX],
            "By": q[BY],
            "Bz": q[BZ],
            "p": pressure(q),
        })
    else:
        nan = np.full(state.grid.dims, np.nan)
        values.update({name: nan for name in STATE_COLUMNS[:9]})
    values.update({"A1": a[0], "A2": a[1], "A3": a[2]})
    return values


def cells_frame(state: SimulationState) -> pd.DataFrame:
    """
    One row per interior cell

    Columns: i, j[, k], x, y[, z], rho, ux, uy, uz, E, Bx, By, Bz, p, A1, A2, A3
    (MHD columns are NaN for pure advection runs).
    """
    grid = state.grid
    index_names = ["i", "j", "k"][: grid.ndim]
    coord_names = ["x", "y", "z"][: grid.ndim]
    indices = np.meshgrid(*[np.arange(n) for n in grid.dims], indexing="ij")
    data = {name: idx.ravel() for name, idx in zip(index_names, indices)}
    centroid = grid.centroid[(slice(None),) + grid.interior]
    data.update({name: centroid[d].ravel() for d, name in enumerate(coord_names)})
    data.update({name: values.ravel() for name, values in _cell_values(state).items()})
    return pd.DataFrame(data, columns=index_names + coord_names + STATE_COLUMNS)


def write_csv(state: SimulationState, path) -> Path:
    path = Path(path)
    try:
        cells_frame(state).to_csv(path, index=False, float_format="%.12e")
    except OSError as exc:
        raise OutputError(path, exc.strerror or str(exc)) from exc
    return path


def _vtk_points(state: SimulationState) -> np.ndarray:
    grid = state.grid
    sl = tuple(slice(grid.ng, grid.ng + n + 1) for n in grid.dims)
    vertices = grid.vertices[(slice(None),) + sl]
    points = np.zeros((3,) + vertices.shape[1:])
    points[: grid.ndim] = vertices
    # VTK wants x fastest
    return points.transpose(0, *range(grid.ndim, 0, -1)).reshape(3, -1).T


def _vtk_order(values: np.ndarray) -> np.ndarray:
    return values.T.ravel()


def write_vtk(state: SimulationState, path, title: str = "ct-mhd snapshot") -> Path:
    """Legacy ASCII VTK STRUCTURED_GRID with the cell data as scalars and vectors."""
    grid = state.grid
    path = Path(path)
    dims = list(grid.dims) + [1] * (3 - grid.ndim)
    point_dims = [n + 1 for n in grid.dims] + [1] * (3 - grid.ndim)
    values = _cell_values(state)
    n_cells = int(np.prod(dims))

    lines = ["# vtk DataFile Version 3.0", f"{title} t={state.t:.10g}", "ASCII", "DATASET STRUCTURED_GRID",
             f"DIMENSIONS {point_dims[0]} {point_dims[1]} {point_dims[2]}",
             f"POINTS {int(np.prod(point_dims))} double"]
    lines += [f"{x:.10e} {y:.10e} {z:.10e}" for x, y, z in _vtk_points(state)]
    lines.append(f"CELL_DATA {n_cells}")
    for name in ("rho", "E", "p"):
        lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        lines += [f"{v:.10e}" for v in _vtk_order(values[name])]
    for name, parts in (("velocity", ("ux", "uy", "uz")), ("B", ("Bx", "By", "Bz")), ("A", ("A1", "A2", "A3"))):
        lines.append(f"VECTORS {name} double")
        columns = [_vtk_order(values[p]) for p in parts]
        lines += [f"{a:.10e} {b:.10e} {c:.10e}" for a, b, c in zip(*columns)]
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OutputError(path, exc.strerror or str(exc)) from exc
    return path


def write_curves(state: SimulationState, base) -> List[Path]:
    """
    Scatter data `x value` of every cell against its centroid x, one file per variable

    Files are named `<base>_<var>.dat`.
    """
    grid = state.grid
    x = grid.centroid[(0,) + grid.interior].ravel()
    values = _cell_values(state)
    paths = []
    for name in CURVE_VARIABLES:
        data = values[name].ravel()
        if np.all(np.isnan(data)):
            continue
        path = Path(f"{base}_{name}.dat")
        order = np.argsort(x, kind="stable")
        try:
            np.savetxt(path, np.column_stack([x[order], data[order]]), fmt="%.10e")
        except OSError as exc:
            raise OutputError(path, exc.strerror or str(exc)) from exc
        paths.append(path)
    return paths


def write_output(state: SimulationState, problem: str, output_dir, formats: Iterable[str]) -> List[Path]:
    """
    Write one snapshot in every requested format

    Args:
        state: State to write
        problem: Problem name used in the file names
        output_dir: Target directory (created if missing)
        formats: Any of csv, vtk, curves

    Returns:
        Paths written
    """
    output_dir = Path(output_dir)
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(output_dir, exc.strerror or str(exc)) from exc

    paths = []
    for fmt in formats:
        if fmt == "csv":
            paths.append(write_csv(state, snapshot_path(output_dir, problem, state.grid.dims, state.step, "csv")))
        elif fmt == "vtk":
            paths.append(write_vtk(state, snapshot_path(output_dir, problem, state.grid.dims, state.step, "vtk")))
        elif fmt == "curves":
            base = output_dir / f"{run_label(problem, state.grid.dims)}_{state.step:06d}"
            paths.extend(write_curves(state, base))
        else:
            raise ValueError(f"Unknown output format '{fmt}'")
    logger.info(f"Wrote {len(paths)} file(s) for step {state.step} to {output_dir}")
    return paths


def write_diagnostics(frame: pd.DataFrame, output_dir, problem: str, dims) -> Path:
    path = Path(output_dir) / f"{run_label(problem, dims)}_diagnostics.csv"
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False)
    except OSError as exc:
        raise OutputError(path, exc.strerror or str(exc)) from exc
    return path
