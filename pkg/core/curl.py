"""
Curl - magnetic field cell averages from the vector potential

B = (1/|C|) * surface integral of n x A, with A at every face node taken as
the mean of the two reconstructed traces so both neighbours see the same
value. Also hosts the divergence and field-budget diagnostics.
"""
import logging
from typing import List, NamedTuple, Sequence

import numpy as np

from core.geometry import MappedGrid, face_difference
from core.reconstruction import CellPolynomials

logger = logging.getLogger(__name__)


class DivergenceStats(NamedTuple):
    max: float
    l1: float


def face_potential_values(polynomials: CellPolynomials, grid: MappedGrid) -> List[np.ndarray]:
    """Single-valued traces (c, K, *faces) per axis: (1/2)(A- + A+)."""
    traces = []
    for axis in range(grid.ndim):
        minus, plus = polynomials.face_traces(axis)
        traces.append(0.5 * (minus + plus))
    return traces


def curl_cell_averages(traces: List[np.ndarray], grid: MappedGrid,
                       components: Sequence[int] = (0, 1, 2)) -> np.ndarray:
    """
    Cell averages of curl A by the divergence theorem

    Args:
        traces: Face values from face_potential_values
        grid: The grid
        components: Which components of A the traces hold; missing ones are zero

    Returns:
        (3, *dims) magnetic field averages. With only A3 given this is
        (dA3/dy, -dA3/dx, 0).
    """
    B = np.zeros((3,) + grid.dims)
    for axis, values in enumerate(traces):
        faces = grid.interior_faces(axis)
        normals = grid.faces[axis]["normals"][(slice(None), slice(None)) + faces]
        weights = grid.faces[axis]["weights"][(slice(None),) + faces]
        potential = np.zeros((3,) + values.shape[1:])
        potential[list(components)] = values
        integrand = np.cross(normals, potential, axis=0)
        totals = np.einsum("ck...,k...->c...", integrand, weights)
        B += face_difference(totals, axis)
    return B / grid.interior_volume()[None]


def curl_of_potential(polynomials: CellPolynomials, grid: MappedGrid,
                      components: Sequence[int] = (0, 1, 2)) -> np.ndarray:
    return curl_cell_averages(face_potential_values(polynomials, grid), grid, components)


def divergence_field(B: np.ndarray, grid: MappedGrid) -> np.ndarray:
    """
    Discrete div B of cell averages, (1/|C|) sum over faces of (1/2)(B- + B+) . S_f

    Args:
        B: (3, *padded) cell averages with ghost layers filled

    Returns:
        (*dims) divergence per interior cell
    """
    ng = grid.ng
    div = np.zeros(grid.dims)
    for axis in range(grid.ndim):
        area = grid.faces[axis]["area_vector"][(slice(None),) + grid.interior_faces(axis)]
        lower = tuple(slice(ng - 1, ng + n) if d == axis else grid.interior[d] for d, n in enumerate(grid.dims))
        upper = tuple(slice(ng, ng + n + 1) if d == axis else grid.interior[d] for d, n in enumerate(grid.dims))
        face_field = 0.5 * (B[(slice(None),) + lower] + B[(slice(None),) + upper])
        fluxes = np.sum(face_field * area, axis=0)
        div += face_difference(fluxes[None], axis)[0]
    return div / grid.interior_volume()


def divergence_diagnostic(B: np.ndarray, grid: MappedGrid) -> DivergenceStats:
    """Max and volume-weighted L1 norm of the discrete divergence; monitoring only."""
    div = np.abs(divergence_field(B, grid))
    volume = grid.interior_volume()
    return DivergenceStats(float(div.max()), float(np.sum(div * volume) / volume.sum()))


def field_budget(B: np.ndarray, grid: MappedGrid) -> np.ndarray:
    """Sum of |C| B over the interior cells, per component; B is (3, *dims)."""
    return np.einsum("ci,i->c", B.reshape(B.shape[0], -1), grid.interior_volume().ravel())


def total_field_budget(B_before: np.ndarray, B_after: np.ndarray, grid: MappedGrid) -> np.ndarray:
    """Componentwise change of the global field budget across a stage."""
    return field_budget(B_after, grid) - field_budget(B_before, grid)
