"""
Resistivity - artificial resistivity for the potential update

Adds eps(x) * Laplacian-type diffusion to L2 in cells where the second
derivative of A (the first derivative of B) jumps sharply. The indicator
compares smoothness measures of a cell with those of all its neighbours that
share a face, an edge or a corner.
"""
import logging
from typing import NamedTuple, Optional, Tuple

import numpy as np

from config.settings import LimiterConfig
from core.geometry import MappedGrid, face_difference
from core.reconstruction import CellPolynomials

logger = logging.getLogger(__name__)

ADVECTION_ETA = 0.2
MHD_ETA = 0.5
STABILITY_LIMIT = 0.5


class LimiterParams(NamedTuple):
    lambda_self: float = 1000.0
    lambda_nbr: float = 1.0
    e: float = 4.0
    eta_mode: str = "mhd"
    eta_scale: float = 1.0

    @classmethod
    def from_config(cls, config: LimiterConfig, default_mode: str = "mhd") -> "LimiterParams":
        if config.lambda_self < config.lambda_nbr:
            logger.warning(f"limiter.lambda_self={config.lambda_self} is below "
                           f"limiter.lambda_nbr={config.lambda_nbr}; the indicator will fire on smooth data")
        return cls(config.lambda_self, config.lambda_nbr, config.e,
                   config.eta_mode or default_mode, config.eta_scale)


def _curvature_terms(polynomials: CellPolynomials) -> np.ndarray:
    """
    Sigma_k = (Laplacian_k * h_k^2)^2 on the reconstruction box, h_k = |C_k|^(1/d)

    The Laplacian is weighted by h^2 = |C|^(2/d) so Sigma_k scales like the ds^4 it is compared with. This equals
    the cell measure |C| in 2D but departs from a |C| weighting in 3D, where |C|^(2/3) is used instead.
    """
    op = polynomials.operator
    return (polynomials.laplacian() * op.scale[None] ** 2) ** 2


def _box_neighbors(polynomials: CellPolynomials):
    op = polynomials.operator
    for offset in op.offsets:
        yield tuple(slice(1 + o, n + 1 + o) for o, n in zip(offset, op.grid.dims))


def smoothness_measures(polynomials: CellPolynomials, params: LimiterParams,
                        normalized: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """
    Smoothness measures sigma_ik = lambda_ik / (ds^4 + Sigma_k)^e of the interior cells

    Args:
        polynomials: Degree-2 reconstruction (second derivatives available)
        params: Limiter weights and exponent
        normalized: Report the measures multiplied by ds^(4e), which keeps
            them within [0, lambda]

    Returns:
        sigma_self (c, *dims) and sigma_neighbors (c, K, *dims), one entry per
        face, edge and corner neighbour
    """
    op = polynomials.operator
    sigma_terms = _curvature_terms(polynomials)
    ds4 = op.ds[op.inner_cells][None] ** 4

    def measure(weight, terms):
        if normalized:
            return weight / (1.0 + terms / ds4) ** params.e
        return weight / (ds4 + terms) ** params.e

    sigma_self = measure(params.lambda_self, sigma_terms[(slice(None),) + op.inner_cells])
    sigma_neighbors = np.stack([measure(params.lambda_nbr, sigma_terms[(slice(None),) + sl])
                                for sl in _box_neighbors(polynomials)], axis=1)
    return sigma_self, sigma_neighbors


def alpha_indicator(S: np.ndarray, sigma_self: np.ndarray) -> np.ndarray:
    """
    Smoothness indicator in [0, 1]

    alpha = (1/2)[1 + sin(pi dS - pi/2)] with dS = |S - sigma_ii| when S > sigma_ii,
    0 otherwise. dS >= 1 gives alpha = 1.
    """
    S = np.asarray(S, dtype=float)
    gap = np.clip(np.abs(S - sigma_self), 0.0, 1.0)
    ramp = 0.5 * (1.0 + np.sin(np.pi * gap - 0.5 * np.pi))
    return np.where(S > sigma_self, ramp, 0.0)


def maximum_viscosity(ds: np.ndarray, dt: float, params: LimiterParams) -> np.ndarray:
    if params.eta_mode == "advection":
        eta = ADVECTION_ETA * ds ** 2 / dt
    elif params.eta_mode == "mhd":
        eta = MHD_ETA * ds
    else:
        raise ValueError(f"Unknown eta mode '{params.eta_mode}'")
    return params.eta_scale * eta


def _pad_box(values: np.ndarray, periodic) -> np.ndarray:
    """Add one ghost layer: wrap on periodic axes, edge copy otherwise."""
    for axis, wrap in enumerate(periodic):
        width = [(0, 0)] * values.ndim
        width[axis] = (1, 1)
        values = np.pad(values, width, mode="wrap" if wrap else "edge")
    return values


def epsilon_field(polynomials: CellPolynomials, grid: MappedGrid, dt: float,
                  params: Optional[LimiterParams] = None) -> np.ndarray:
    """
    Artificial resistivity eps = eta * alpha

    Args:
        polynomials: Reconstruction of the evolved components of A
        grid: The grid
        dt: Current step size
        params: Limiter parameters

    Returns:
        eps on the reconstruction box (interior cells plus one ghost layer)
    """
    if dt <= 0:
        raise ValueError(f"Resistivity needs dt > 0, got {dt}")
    params = params or LimiterParams()
    sigma_self, sigma_neighbors = smoothness_measures(polynomials, params, normalized=True)
    alpha = alpha_indicator(sigma_neighbors.max(axis=1), sigma_self).max(axis=0)

    ds = grid.ds[grid.interior]
    epsilon = maximum_viscosity(ds, dt, params) * alpha
    limit = STABILITY_LIMIT * ds ** 2 / dt
    if np.any(epsilon > limit):
        logger.warning(f"Clamping artificial resistivity in {int(np.sum(epsilon > limit))} cells "
                       f"to eps*dt/ds^2 <= {STABILITY_LIMIT}")
        epsilon = np.minimum(epsilon, limit)
    if np.any(alpha > 0):
        logger.debug(f"Resistivity active in {int(np.sum(alpha > 0))} cells, max eps={epsilon.max():.3e}")
    return _pad_box(epsilon, grid.periodic)


def apply_resistivity(polynomials: CellPolynomials, epsilon: np.ndarray, grid: MappedGrid) -> np.ndarray:
    """
    Diffusion (1/|C|) sum over faces of eps_face * grad(A) . n

    Face gradients are the mean of both sides' reconstructed gradients and
    eps_face is the mean of the two adjacent cell values.

    Returns:
        (c, *dims) contribution to dA/dt
    """
    op = polynomials.operator
    result = np.zeros((polynomials.nvar,) + grid.dims)
    for axis in range(grid.ndim):
        faces = grid.interior_faces(axis)
        normals = grid.faces[axis]["normals"][(slice(grid.ndim), slice(None)) + faces]
        weights = grid.faces[axis]["weights"][(slice(None),) + faces]
        grad_minus, grad_plus = polynomials.face_gradients(axis)
        normal_gradient = np.einsum("cdk...,dk...->ck...", 0.5 * (grad_minus + grad_plus), normals)
        eps_face = 0.5 * (epsilon[op.left_cells[axis]] + epsilon[op.right_cells[axis]])
        totals = np.einsum("ck...,k...->c...", normal_gradient, weights) * eps_face[None]
        result += face_difference(totals, axis)
    return result / grid.interior_volume()[None]
