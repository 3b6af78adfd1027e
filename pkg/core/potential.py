"""
Potential - path-conservative operator L2 for the magnetic vector potential

Under the Weyl gauge the potential obeys A_t + N1(u) A_x + N2(u) A_y + N3(u) A_z = 0,
a weakly hyperbolic system with the velocity as a given coefficient. Interfaces
use a straight-line path between the two traces; the smooth part inside each
cell is integrated with the cell's volume quadrature.
"""
import logging
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from core.errors import PositivityError
from core.geometry import MappedGrid
from core.mhd import MX, MY, MZ, RHO
from core.reconstruction import CellPolynomials
from core.resistivity import apply_resistivity

logger = logging.getLogger(__name__)

SCALAR_COMPONENTS = (2,)
ALL_COMPONENTS = (0, 1, 2)
ALPHA_FLOOR = 1e-10


class PathMatrix(NamedTuple):
    matrix: np.ndarray  # (c, c, ...)
    alpha: np.ndarray  # (...)


def coefficient_matrices(u: np.ndarray) -> np.ndarray:
    """
    Coefficient matrices N1, N2, N3 of the potential equation

    Args:
        u: Velocity (3, ...)

    Returns:
        (3, 3, 3, ...) array; entry [i] is N_{i+1}
    """
    u = np.asarray(u, dtype=float)
    N = np.zeros((3, 3, 3) + u.shape[1:])
    N[0, 0, 1], N[0, 0, 2] = -u[1], -u[2]
    N[0, 1, 1] = N[0, 2, 2] = u[0]
    N[1, 0, 0] = N[1, 2, 2] = u[1]
    N[1, 1, 0], N[1, 1, 2] = -u[0], -u[2]
    N[2, 0, 0] = N[2, 1, 1] = u[2]
    N[2, 2, 0], N[2, 2, 1] = -u[0], -u[1]
    return N


def directional_matrix(n: np.ndarray, u: np.ndarray) -> np.ndarray:
    """M(n, u) = n1 N1 + n2 N2 + n3 N3, shape (3, 3, ...)."""
    return np.einsum("i...,iab...->ab...", np.asarray(n, dtype=float), coefficient_matrices(u))


def _block(matrix: np.ndarray, components: Sequence[int]) -> np.ndarray:
    idx = list(components)
    return matrix[idx][:, idx]


def path_matrix(u_minus: np.ndarray, u_plus: np.ndarray, n: np.ndarray,
                components: Sequence[int] = ALL_COMPONENTS, floor: float = 0.0) -> PathMatrix:
    """
    Interface matrix for the straight-line path and its speed bound

    Args:
        u_minus, u_plus: Velocity traces (3, ...) on both sides
        n: Unit normals (3, ...)
        components: Evolved components of A
        floor: Added to alpha so it stays positive when u.n vanishes
    """
    matrix = 0.5 * (directional_matrix(n, u_minus) + directional_matrix(n, u_plus))
    alpha = np.maximum(np.abs(np.sum(u_minus * n, axis=0)), np.abs(np.sum(u_plus * n, axis=0))) + floor
    return PathMatrix(_block(matrix, components), alpha)


def _apply(matrix: np.ndarray, vector: np.ndarray) -> np.ndarray:
    return np.einsum("ab...,b...->a...", matrix, vector)


def rusanov_fluctuations(a_minus: np.ndarray, a_plus: np.ndarray, pm: PathMatrix) -> Tuple[np.ndarray, np.ndarray]:
    """A-dq, A+dq = (1/2)(A_psi -+ alpha I)(a+ - a-)."""
    jump = a_plus - a_minus
    projected = _apply(pm.matrix, jump)
    damping = pm.alpha[None] * jump
    return 0.5 * (projected - damping), 0.5 * (projected + damping)


def force_fluctuations(a_minus: np.ndarray, a_plus: np.ndarray, pm: PathMatrix,
                       dx, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    FORCE fluctuations, the average of Lax-Friedrichs and Lax-Wendroff splittings

    A-+dq = (1/4)[2 A_psi -+ (dx/dt) I -+ (dt/dx) A_psi^2] dq
    """
    if dt <= 0:
        raise ValueError(f"FORCE fluctuations need dt > 0, got {dt}")
    dx = np.asarray(dx, dtype=float)
    jump = a_plus - a_minus
    projected = _apply(pm.matrix, jump)
    dissipation = (dx / dt)[None] * jump + (dt / dx)[None] * _apply(pm.matrix, projected)
    return 0.25 * (2.0 * projected - dissipation), 0.25 * (2.0 * projected + dissipation)


class VelocityField:
    """
    Velocity at the face and volume quadrature nodes of the interior cells

    faces[axis] holds the traces (u-, u+), each (3, K, *faces); volume is
    (3, Q, *dims).
    """

    def __init__(self, faces: List[Tuple[np.ndarray, np.ndarray]], volume: np.ndarray):
        self.faces = faces
        self.volume = volume

    @classmethod
    def from_polynomials(cls, polynomials: CellPolynomials) -> "VelocityField":
        """Velocity as the ratio of the momentum and density reconstructions."""
        flow = polynomials.select([RHO, MX, MY, MZ])
        op = flow.operator
        faces = []
        for axis in range(op.ndim):
            minus, plus = flow.face_traces(axis)
            faces.append((_velocity(minus, axis), _velocity(plus, axis)))
        return cls(faces, _velocity(flow.volume_values()))

    @classmethod
    def constant(cls, u: Sequence[float], grid: MappedGrid) -> "VelocityField":
        """Prescribed uniform velocity."""
        u = np.asarray(u, dtype=float).reshape(3, 1)
        faces = []
        for axis in range(grid.ndim):
            shape = grid.faces[axis]["points"][(0, slice(None)) + grid.interior_faces(axis)].shape
            value = np.broadcast_to(u.reshape((3,) + (1,) * len(shape)), (3,) + shape)
            faces.append((value, value))
        shape = (grid.vol_weights.shape[0],) + grid.dims
        return cls(faces, np.broadcast_to(u.reshape((3,) + (1,) * len(shape)), (3,) + shape))

    def max_normal_speed(self, grid: MappedGrid) -> float:
        speed = 0.0
        for axis, (minus, plus) in enumerate(self.faces):
            n = grid.faces[axis]["normals"][(slice(None), slice(None)) + grid.interior_faces(axis)]
            for side in (minus, plus):
                speed = max(speed, float(np.max(np.abs(np.sum(side * n, axis=0)))))
        return speed


def _velocity(values: np.ndarray, axis: Optional[int] = None) -> np.ndarray:
    # values: (4, K, ...) of (rho, rho u) at face nodes (axis set) or volume nodes
    bad = ~(values[0] > 0)
    if np.any(bad):
        node, *index = (int(i) for i in np.argwhere(bad)[0])
        logger.error(f"Non-positive density {values[(0, node) + tuple(index)]:.6g} while forming the velocity")
        raise PositivityError(index, values[(slice(None), node) + tuple(index)], axis=axis, node=node)
    return values[1:] / values[0][None]


def volume_term(polynomials: CellPolynomials, velocity: VelocityField, grid: MappedGrid,
                components: Sequence[int] = ALL_COMPONENTS) -> np.ndarray:
    """
    Cell integral of sum_i N_i(u) dA/dx_i by volume quadrature

    Returns:
        (c, *dims) integrals (not yet divided by the cell volume)
    """
    gradients = polynomials.volume_gradients()  # (c, d, Q, *dims)
    N = coefficient_matrices(velocity.volume)  # (3, 3, 3, Q, *dims)
    integrand = np.zeros((len(components),) + gradients.shape[2:])
    for i in range(grid.ndim):
        integrand += _apply(_block(N[i], components), gradients[:, i])
    weights = grid.vol_weights[(slice(None),) + grid.interior]
    return np.einsum("cq...,q...->c...", integrand, weights)


def _face_scale(polynomials: CellPolynomials, axis: int) -> np.ndarray:
    op = polynomials.operator
    return 0.5 * (op.ds[op.left_cells[axis]] + op.ds[op.right_cells[axis]])


def potential_rhs(polynomials: CellPolynomials, velocity: VelocityField, grid: MappedGrid,
                  components: Sequence[int] = SCALAR_COMPONENTS, solver: str = "rusanov",
                  dt: Optional[float] = None, epsilon: Optional[np.ndarray] = None) -> np.ndarray:
    """
    L2: time derivative of the evolved potential components

    Args:
        polynomials: Reconstruction of the evolved components of A (ghosts filled)
        velocity: Velocity at the quadrature nodes
        grid: The grid
        components: Evolved components, (2,) for the scalar 2.5D equation
        solver: "rusanov" or "force"
        dt: Step size (needed by FORCE and for the Rusanov alpha floor)
        epsilon: Artificial resistivity on the reconstruction box, or None

    Returns:
        (c, *dims) derivatives of the cell averages
    """
    if solver not in ("rusanov", "force"):
        raise ValueError(f"Unknown potential solver '{solver}'")
    if solver == "force" and not dt:
        raise ValueError("The FORCE solver needs the step size")

    rhs = -volume_term(polynomials, velocity, grid, components)
    for axis in range(grid.ndim):
        faces = grid.interior_faces(axis)
        n = grid.faces[axis]["normals"][(slice(None), slice(None)) + faces]
        weights = grid.faces[axis]["weights"][(slice(None),) + faces]
        a_minus, a_plus = polynomials.face_traces(axis)
        u_minus, u_plus = velocity.faces[axis]
        scale = _face_scale(polynomials, axis)[None]

        floor = ALPHA_FLOOR * scale / dt if dt else 0.0
        pm = path_matrix(u_minus, u_plus, n, components, floor=floor)
        if solver == "force":
            to_left, to_right = force_fluctuations(a_minus, a_plus, pm, np.broadcast_to(scale, pm.alpha.shape), dt)
        else:
            to_left, to_right = rusanov_fluctuations(a_minus, a_plus, pm)

        left_total = np.einsum("ck...,k...->c...", to_left, weights)
        right_total = np.einsum("ck...,k...->c...", to_right, weights)
        # a cell receives A+dq from its lower face and A-dq from its upper face
        lower = tuple(slice(None, -1) if d == axis else slice(None) for d in range(grid.ndim))
        upper = tuple(slice(1, None) if d == axis else slice(None) for d in range(grid.ndim))
        rhs -= right_total[(slice(None),) + lower] + left_total[(slice(None),) + upper]

    rhs /= grid.interior_volume()[None]
    if epsilon is not None:
        rhs += apply_resistivity(polynomials, epsilon, grid)
    return rhs
