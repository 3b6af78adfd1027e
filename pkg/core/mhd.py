"""
MHD - ideal magnetohydrodynamics and the conservative operator L1

Conserved variables q = (rho, rho u, E, B) are stored variable-first, so every
function works on arrays of shape (8, ...). Interface fluxes come from an
f-wave solver built on the eigenvectors of the eight-wave system (divergence
wave included) at the arithmetic mean of the two primitive states.
"""
import logging
from typing import NamedTuple, Optional, Tuple

import numpy as np

from config.settings import settings
from core.errors import PositivityError
from core.geometry import MappedGrid, face_difference
from core.reconstruction import CellPolynomials

logger = logging.getLogger(__name__)

GAMMA = 5.0 / 3.0
NVAR = 8
RHO, MX, MY, MZ, ENERGY, BX, BY, BZ = range(NVAR)
MOMENTUM = slice(MX, MZ + 1)
FIELD = slice(BX, BZ + 1)
VARIABLE_NAMES = ("rho", "mx", "my", "mz", "E", "Bx", "By", "Bz")


class WaveSpeeds(NamedTuple):
    sound: np.ndarray
    alfven: np.ndarray
    slow: np.ndarray
    fast: np.ndarray


class EigenSystem(NamedTuple):
    values: np.ndarray
    right: np.ndarray
    left: np.ndarray


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a * b, axis=0)


def pressure(q: np.ndarray) -> np.ndarray:
    rho = q[RHO]
    kinetic = 0.5 * _dot(q[MOMENTUM], q[MOMENTUM]) / rho
    magnetic = 0.5 * _dot(q[FIELD], q[FIELD])
    return (GAMMA - 1.0) * (q[ENERGY] - kinetic - magnetic)


def check_admissible(q: np.ndarray, stage: Optional[int] = None):
    """Raise PositivityError for the first cell with rho <= 0 or p <= 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        p = pressure(q)
    bad = ~((q[RHO] > 0) & (p > 0))
    if np.any(bad):
        cell = tuple(np.argwhere(bad)[0])
        logger.error(f"Inadmissible state at cell {cell}: rho={q[(RHO,) + cell]:.6g}, p={p[cell]:.6g}")
        raise PositivityError(cell, q[(slice(None),) + cell], stage=stage)


def primitive_from_conserved(q: np.ndarray, check: bool = True) -> np.ndarray:
    """
    Convert (rho, rho u, E, B) to (rho, u, p, B)

    Raises:
        PositivityError: if rho <= 0 or the recovered pressure is <= 0
    """
    q = np.asarray(q, dtype=float)
    if check:
        check_admissible(q)
    w = np.empty_like(q)
    w[RHO] = q[RHO]
    w[MOMENTUM] = q[MOMENTUM] / q[RHO]
    w[ENERGY] = pressure(q)
    w[FIELD] = q[FIELD]
    return w


def conserved_from_primitive(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    q = np.empty_like(w)
    q[RHO] = w[RHO]
    q[MOMENTUM] = w[RHO] * w[MOMENTUM]
    q[ENERGY] = (w[ENERGY] / (GAMMA - 1.0) + 0.5 * w[RHO] * _dot(w[MOMENTUM], w[MOMENTUM])
                 + 0.5 * _dot(w[FIELD], w[FIELD]))
    q[FIELD] = w[FIELD]
    return q


def flux(q: np.ndarray, n: np.ndarray, check: bool = True) -> np.ndarray:
    """Normal flux F(q) . n for unit directions n (3, ...)."""
    w = primitive_from_conserved(q, check=check)
    n = np.asarray(n, dtype=float)
    u, B = w[MOMENTUM], w[FIELD]
    un, bn = _dot(u, n), _dot(B, n)
    total_pressure = w[ENERGY] + 0.5 * _dot(B, B)

    f = np.empty(np.broadcast_shapes(q.shape, (NVAR,) + n.shape[1:]))
    f[RHO] = q[RHO] * un
    f[MOMENTUM] = q[MOMENTUM] * un + total_pressure * n - B * bn
    f[ENERGY] = (q[ENERGY] + total_pressure) * un - bn * _dot(u, B)
    f[FIELD] = u * bn - B * un
    return f


def wave_speeds(w: np.ndarray, n: np.ndarray) -> WaveSpeeds:
    """Sound, Alfven, slow and fast speeds of primitive states along n."""
    rho, p = w[RHO], w[ENERGY]
    B = w[FIELD]
    a2 = GAMMA * p / rho
    ca2 = _dot(B, n) ** 2 / rho
    total = a2 + _dot(B, B) / rho
    disc = np.sqrt(np.maximum(total ** 2 - 4.0 * a2 * ca2, 0.0))
    cf2 = 0.5 * (total + disc)
    cs2 = a2 * ca2 / cf2
    return WaveSpeeds(np.sqrt(a2), np.sqrt(ca2), np.sqrt(cs2), np.sqrt(cf2))


def tangent_frame(n: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Unit tangents t1, t2 with (n, t1, t2) right handed; t2 = z for in-plane n."""
    n = np.asarray(n, dtype=float)
    use_z = np.abs(n[2]) < 0.9
    t1 = np.where(use_z[None], np.stack([-n[1], n[0], np.zeros_like(n[0])]),
                  np.stack([np.zeros_like(n[0]), -n[2], n[1]]))
    t1 = t1 / np.sqrt(_dot(t1, t1))
    t2 = np.cross(n, t1, axis=0)
    return t1, t2


def eigenvalues(w: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Eight eigenvalues in ascending order: u.n -+ c_f, c_a, c_s and u.n twice."""
    speeds = wave_speeds(w, n)
    un = _dot(w[MOMENTUM], n)
    return np.stack([un - speeds.fast, un - speeds.alfven, un - speeds.slow, un, un,
                     un + speeds.slow, un + speeds.alfven, un + speeds.fast])


def _primitive_jacobian(w: np.ndarray) -> np.ndarray:
    """dq/dw with w = (rho, u, p, B); shape (..., 8, 8)."""
    shape = w.shape[1:]
    rho, u, B = w[RHO], w[MOMENTUM], w[FIELD]
    J = np.zeros(shape + (NVAR, NVAR))
    J[..., RHO, RHO] = 1.0
    for i in range(3):
        J[..., MX + i, RHO] = u[i]
        J[..., MX + i, MX + i] = rho
        J[..., ENERGY, MX + i] = rho * u[i]
        J[..., ENERGY, BX + i] = B[i]
        J[..., BX + i, BX + i] = 1.0
    J[..., ENERGY, RHO] = 0.5 * _dot(u, u)
    J[..., ENERGY, ENERGY] = 1.0 / (GAMMA - 1.0)
    return J


def right_eigenvectors(w: np.ndarray, n: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigenvalues (8, ...) and conserved right eigenvectors (..., 8, 8)

    Columns follow the eigenvalue order. Vectors are built for the primitive
    system in the frame (n, t1, t2) with the usual normalisation of the fast
    and slow families, rotated back and mapped through dq/dw.
    """
    w = np.asarray(w, dtype=float)
    shape = np.broadcast_shapes(w.shape[1:], np.shape(n)[1:])
    w = np.broadcast_to(w, (NVAR,) + shape)
    n = np.broadcast_to(np.asarray(n, dtype=float), (3,) + shape)
    t1, t2 = tangent_frame(n)

    rho, p, B = w[RHO], w[ENERGY], w[FIELD]
    bn, bt1, bt2 = _dot(B, n), _dot(B, t1), _dot(B, t2)
    speeds = wave_speeds(w, n)
    a, cs, cf = speeds.sound, speeds.slow, speeds.fast
    sqrt_rho = np.sqrt(rho)

    sign = np.where(bn >= 0.0, 1.0, -1.0)
    bperp = np.sqrt(bt1 ** 2 + bt2 ** 2)
    flat = bperp ** 2 <= 1e-24 * (rho * a ** 2 + bn ** 2)
    safe_perp = np.where(flat, 1.0, bperp)
    beta_y = np.where(flat, np.sqrt(0.5), bt1 / safe_perp)
    beta_z = np.where(flat, np.sqrt(0.5), bt2 / safe_perp)

    a2, cs2, cf2 = a ** 2, cs ** 2, cf ** 2
    gap = cf2 - cs2
    degenerate = gap <= 1e-12 * cf2
    safe_gap = np.where(degenerate, 1.0, gap)
    alpha_f = np.where(degenerate, 1.0, np.sqrt(np.clip((a2 - cs2) / safe_gap, 0.0, 1.0)))
    alpha_s = np.where(degenerate, 0.0, np.sqrt(np.clip((cf2 - a2) / safe_gap, 0.0, 1.0)))

    R = np.zeros((NVAR, NVAR) + shape)
    for col, s in ((0, -1.0), (7, 1.0)):
        R[RHO, col] = rho * alpha_f
        R[MX, col] = s * alpha_f * cf
        R[MY, col] = -s * alpha_s * cs * beta_y * sign
        R[MZ, col] = -s * alpha_s * cs * beta_z * sign
        R[ENERGY, col] = rho * a2 * alpha_f
        R[BY, col] = alpha_s * sqrt_rho * a * beta_y
        R[BZ, col] = alpha_s * sqrt_rho * a * beta_z
    for col, s in ((1, -1.0), (6, 1.0)):
        R[MY, col] = -beta_z
        R[MZ, col] = beta_y
        R[BY, col] = s * beta_z * sign * sqrt_rho
        R[BZ, col] = -s * beta_y * sign * sqrt_rho
    for col, s in ((2, -1.0), (5, 1.0)):
        R[RHO, col] = rho * alpha_s
        R[MX, col] = s * alpha_s * cs
        R[MY, col] = s * alpha_f * cf * beta_y * sign
        R[MZ, col] = s * alpha_f * cf * beta_z * sign
        R[ENERGY, col] = rho * a2 * alpha_s
        R[BY, col] = -alpha_f * sqrt_rho * a * beta_y
        R[BZ, col] = -alpha_f * sqrt_rho * a * beta_z
    R[RHO, 3] = 1.0
    R[BX, 4] = 1.0

    # rows above hold frame components (n, t1, t2) in the MX..MZ and BX..BZ slots
    frame = np.stack([n, t1, t2], axis=1)
    rotated = R.copy()
    rotated[MOMENTUM] = np.einsum("ij...,jc...->ic...", frame, R[MOMENTUM])
    rotated[FIELD] = np.einsum("ij...,jc...->ic...", frame, R[FIELD])

    right = np.einsum("...ij,jc...->...ic", _primitive_jacobian(w), rotated)
    values = np.stack([-cf, -speeds.alfven, -cs, 0 * cf, 0 * cf, cs, speeds.alfven, cf]) + _dot(w[MOMENTUM], n)
    return values, right


def eigen_decomposition(w: np.ndarray, n: np.ndarray) -> EigenSystem:
    """
    Eigenvalues, right and left eigenvectors of the eight-wave system along n

    Args:
        w: Primitive states (8, ...)
        n: Unit directions (3, ...)

    Returns:
        EigenSystem(values (8, ...), right (..., 8, 8), left (..., 8, 8))
    """
    values, right = right_eigenvectors(w, n)
    return EigenSystem(values, right, np.linalg.inv(right))


def _split_weights(values: np.ndarray) -> np.ndarray:
    return np.where(values < 0.0, 1.0, np.where(values > 0.0, 0.0, 0.5))


def riemann_fluctuations(q_minus: np.ndarray, q_plus: np.ndarray, n: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    f-wave fluctuations (A-dq, A+dq) across interfaces with normal n

    The flux difference is decomposed on the eigenvectors at the arithmetic
    mean of the primitive states; waves with negative speed go left, positive
    right, zero-speed waves are shared equally.
    """
    q_minus = np.asarray(q_minus, dtype=float)
    q_plus = np.asarray(q_plus, dtype=float)
    shape = np.broadcast_shapes(q_minus.shape[1:], q_plus.shape[1:], np.shape(n)[1:])
    q_minus = np.broadcast_to(q_minus, (NVAR,) + shape).reshape(NVAR, -1)
    q_plus = np.broadcast_to(q_plus, (NVAR,) + shape).reshape(NVAR, -1)
    n = np.broadcast_to(np.asarray(n, dtype=float), (3,) + shape).reshape(3, -1)

    left = np.empty_like(q_minus)
    right = np.empty_like(q_minus)
    chunk = max(int(settings.CHUNK_SIZE), 1)
    for start in range(0, q_minus.shape[1], chunk):
        sl = slice(start, start + chunk)
        left[:, sl], right[:, sl] = _fluctuations(q_minus[:, sl], q_plus[:, sl], n[:, sl])
    return left.reshape((NVAR,) + shape), right.reshape((NVAR,) + shape)


def _fluctuations(q_minus, q_plus, n):
    w_mean = 0.5 * (primitive_from_conserved(q_minus) + primitive_from_conserved(q_plus))
    jump = flux(q_plus, n) - flux(q_minus, n)
    values, right = right_eigenvectors(w_mean, n)
    strengths = np.linalg.solve(right, jump.T[..., None])[..., 0]
    waves = right * strengths[:, None, :]
    to_left = np.einsum("mvp,pm->vm", waves, _split_weights(values))
    return to_left, jump - to_left


def interface_flux(q_minus: np.ndarray, q_plus: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Numerical flux F(q-) . n + A-dq."""
    to_left, _ = riemann_fluctuations(q_minus, q_plus, n)
    return flux(q_minus, n) + to_left


def check_traces(traces: np.ndarray, axis: int):
    """
    Raise PositivityError for the first face node with rho <= 0 or p <= 0

    Args:
        traces: (8, K, *faces) reconstructed values at the face quadrature nodes
        axis: Face direction, reported with the error
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        p = pressure(traces)
    bad = ~((traces[RHO] > 0) & (p > 0))
    if np.any(bad):
        node, *face = (int(i) for i in np.argwhere(bad)[0])
        index = (node,) + tuple(face)
        logger.error(f"Inadmissible trace at face {tuple(face)} (axis {axis}, node {node}): "
                     f"rho={traces[(RHO,) + index]:.6g}, p={p[index]:.6g}")
        raise PositivityError(face, traces[(slice(None),) + index], axis=axis, node=node)


def _face_fluxes(polynomials: CellPolynomials, grid: MappedGrid, axis: int) -> np.ndarray:
    q_minus, q_plus = polynomials.face_traces(axis)
    check_traces(q_minus, axis)
    check_traces(q_plus, axis)
    normals = grid.faces[axis]["normals"][(slice(None), slice(None)) + grid.interior_faces(axis)]
    return interface_flux(q_minus, q_plus, normals)


def mhd_rhs_mapped(polynomials: CellPolynomials, grid: MappedGrid) -> np.ndarray:
    """
    L1 on a mapped grid: -(1/|C|) sum over faces of the sqrt(a)-weighted flux quadrature

    Args:
        polynomials: Reconstruction of the conserved variables (ghosts filled)
        grid: The grid

    Returns:
        (8, *dims) time derivatives of the cell averages
    """
    check_admissible(polynomials.interior_means())
    rhs = np.zeros((NVAR,) + grid.dims)
    for axis in range(grid.ndim):
        fluxes = _face_fluxes(polynomials, grid, axis)
        weights = grid.faces[axis]["weights"][(slice(None),) + grid.interior_faces(axis)]
        totals = np.einsum("vk...,k...->v...", fluxes, weights)
        rhs -= face_difference(totals, axis)
    return rhs / grid.interior_volume()[None]


def mhd_rhs_cartesian(polynomials: CellPolynomials, grid: MappedGrid) -> np.ndarray:
    """L1 on a Cartesian grid: -(f+ - f-)/dx - (g+ - g-)/dy [- (h+ - h-)/dz]."""
    if not grid.is_cartesian:
        raise ValueError("mhd_rhs_cartesian needs a Cartesian grid")
    check_admissible(polynomials.interior_means())
    _, weights = grid.quadrature.tensor(grid.ndim - 1)
    rhs = np.zeros((NVAR,) + grid.dims)
    for axis in range(grid.ndim):
        fluxes = _face_fluxes(polynomials, grid, axis)
        totals = np.einsum("vk...,k->v...", fluxes, weights)
        rhs -= face_difference(totals, axis) / grid.spacing[axis]
    return rhs


def mhd_rhs(polynomials: CellPolynomials, grid: MappedGrid) -> np.ndarray:
    if grid.is_cartesian:
        return mhd_rhs_cartesian(polynomials, grid)
    return mhd_rhs_mapped(polynomials, grid)
