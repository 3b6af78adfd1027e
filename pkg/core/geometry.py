"""
Geometry - Cartesian and mapped (ruled-cell) grids with precomputed metrics

Every cell is the bilinear (2D) or trilinear (3D) image of the unit square/cube
spanned by its vertices. Volumes, centroids, face normals and area weights are
evaluated once at Gauss points and cached on the grid.
"""
import itertools
import logging
from functools import lru_cache
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.errors import DegenerateFaceError, FoldedGridError

logger = logging.getLogger(__name__)

GHOST_LAYERS = 2
SHOCKTUBE_REGION = 0.6
SHOCKTUBE_LENGTH = 1.2
CLOUD_SHELL_WIDTH = 0.1


class QuadratureRule:
    """Gauss-Legendre nodes and weights on [0, 1]."""

    def __init__(self, n: int):
        nodes, weights = np.polynomial.legendre.leggauss(n)
        self.n = n
        self.nodes = 0.5 * (nodes + 1.0)
        self.weights = 0.5 * weights

    def tensor(self, dim: int) -> Tuple[np.ndarray, np.ndarray]:
        """Tensor-product rule on the unit box: points (Q, dim), weights (Q,)."""
        if dim == 0:
            return np.zeros((1, 0)), np.ones(1)
        points = np.array(list(itertools.product(self.nodes, repeat=dim)))
        weights = np.array([np.prod(w) for w in itertools.product(self.weights, repeat=dim)])
        return points, weights


@lru_cache(maxsize=None)
def quadrature_rule(n: int) -> QuadratureRule:
    return QuadratureRule(n)


class GridDescriptor(BaseModel):
    """What build_grid needs to know about a grid."""
    model_config = ConfigDict(frozen=True)

    kind: str = "cartesian"
    dims: Tuple[int, ...]
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    beta: float = 0.0
    lengths: Optional[Tuple[float, ...]] = None
    periodic: Tuple[bool, ...] = ()
    quadrature: int = Field(2, ge=2, le=5)
    center: Optional[Tuple[float, ...]] = None
    radius: float = 0.15


class CellGeometry(BaseModel):
    volume: float
    centroid: Tuple[float, ...]
    ds: float


class FaceGeometry(BaseModel):
    """Metric data of one face at its quadrature nodes."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    points: np.ndarray
    normals: np.ndarray
    sqrt_a: np.ndarray
    weights: np.ndarray
    measure: float


# ---------------------------------------------------------------------------
# Mappings from computational to physical coordinates
# ---------------------------------------------------------------------------

def identity_mapping(xc: np.ndarray) -> np.ndarray:
    return xc.copy()


def colella_mapping(xc: np.ndarray, beta: float, lengths) -> np.ndarray:
    """x + beta * prod_d sin(2 pi x_d / L_d) * (1, ..., 1)."""
    bump = np.ones_like(xc[0])
    for d in range(xc.shape[0]):
        bump = bump * np.sin(2.0 * np.pi * xc[d] / lengths[d])
    return xc + beta * bump[None]


def shocktube_mapping(xc: np.ndarray, beta: float) -> np.ndarray:
    """Colella mapping restricted to [-0.6, 0.6]^d, identity outside."""
    inside = np.all(np.abs(xc) <= SHOCKTUBE_REGION, axis=0)
    mapped = colella_mapping(xc, beta, [SHOCKTUBE_LENGTH] * xc.shape[0])
    return np.where(inside[None], mapped, xc)


def cloud_inclusion_mapping(xc: np.ndarray, beta: float, center, radius: float) -> np.ndarray:
    """
    Pull the max-norm shell of the given radius toward the Euclidean circle/sphere

    The displacement is weighted by a hat function of the max-norm distance
    that peaks on the shell and vanishes CLOUD_SHELL_WIDTH away from it.
    """
    rel = xc - np.asarray(center, dtype=float).reshape((-1,) + (1,) * (xc.ndim - 1))
    s = np.max(np.abs(rel), axis=0)
    r = np.sqrt(np.sum(rel ** 2, axis=0))
    hat = np.clip(1.0 - np.abs(s - radius) / CLOUD_SHELL_WIDTH, 0.0, 1.0)
    ratio = np.divide(s, r, out=np.ones_like(s), where=r > 0)
    return xc + beta * hat[None] * rel * (ratio[None] - 1.0)


def mapping_for(descriptor: GridDescriptor) -> Callable[[np.ndarray], np.ndarray]:
    kind = descriptor.kind
    if kind == "cartesian" or (descriptor.beta == 0.0 and kind != "cloud-inclusion"):
        return identity_mapping
    if kind == "colella":
        lengths = descriptor.lengths or tuple(u - l for l, u in zip(descriptor.lower, descriptor.upper))
        return lambda xc: colella_mapping(xc, descriptor.beta, lengths)
    if kind == "shocktube-blend":
        return lambda xc: shocktube_mapping(xc, descriptor.beta)
    if kind == "cloud-inclusion":
        if descriptor.center is None:
            raise ValueError("cloud-inclusion grid needs a center")
        return lambda xc: cloud_inclusion_mapping(xc, descriptor.beta, descriptor.center, descriptor.radius)
    raise ValueError(f"Unknown grid kind '{kind}'")


# ---------------------------------------------------------------------------
# Ruled-cell evaluation
# ---------------------------------------------------------------------------

def _corner_slices(shape_cells, corner, skip_axis=None):
    slices = [slice(None)]
    for d, n in enumerate(shape_cells):
        if d == skip_axis:
            slices.append(slice(None))
        else:
            slices.append(slice(corner[d], corner[d] + n))
    return tuple(slices)


def _ruled_eval(vertices: np.ndarray, ref, derivative: Optional[int] = None, face_axis: Optional[int] = None):
    """
    Evaluate the ruled map (or one of its reference derivatives) of every cell

    With face_axis set, the map is evaluated on the face family orthogonal to
    that axis: the axis index runs over vertex planes and ref[face_axis] is
    ignored.
    """
    ndim = vertices.shape[0]
    cells = [n - 1 for n in vertices.shape[1:]]
    if face_axis is not None:
        cells[face_axis] = vertices.shape[1 + face_axis]
    result = 0.0
    for corner in itertools.product((0, 1), repeat=ndim):
        if face_axis is not None and corner[face_axis] == 1:
            continue
        weight = 1.0
        for d in range(ndim):
            if d == face_axis:
                continue
            if d == derivative:
                weight *= 1.0 if corner[d] else -1.0
            else:
                weight *= ref[d] if corner[d] else 1.0 - ref[d]
        result = result + weight * vertices[_corner_slices(cells, corner, skip_axis=face_axis)]
    return result


def _face_tangent_axes(ndim: int, axis: int) -> Tuple[int, ...]:
    if ndim == 2:
        return (1 - axis,)
    if ndim == 3:
        return ((1, 2), (2, 0), (0, 1))[axis]
    return ()


class MappedGrid:
    """
    Logically rectangular grid with two ghost layers and cached metrics

    Arrays covering cells use the padded shape `self.padded`; `self.interior`
    selects the physical cells. Face arrays for axis d have one extra entry
    along d (index p is the face between padded cells p-1 and p).
    """

    def __init__(self, descriptor: GridDescriptor, vertices: np.ndarray):
        self.descriptor = descriptor
        self.ndim = len(descriptor.dims)
        self.dims = tuple(descriptor.dims)
        self.ng = GHOST_LAYERS
        self.padded = tuple(n + 2 * self.ng for n in self.dims)
        self.interior = tuple(slice(self.ng, self.ng + n) for n in self.dims)
        self.periodic = tuple(descriptor.periodic) or (False,) * self.ndim
        self.spacing = tuple((u - l) / n for l, u, n in zip(descriptor.lower, descriptor.upper, self.dims))
        self.vertices = vertices
        self.quadrature = quadrature_rule(descriptor.quadrature)
        self.is_cartesian = descriptor.kind == "cartesian" or (
            descriptor.beta == 0.0 and descriptor.kind != "cloud-inclusion")

        self.vol_points, self.vol_weights = self.cell_quadrature(descriptor.quadrature)
        self.volume = self.vol_weights.sum(axis=0)
        self.centroid = np.einsum("dq...,q...->d...", self.vol_points, self.vol_weights) / self.volume
        self.ds = self._smallest_edges()
        self.faces = [self._face_metrics(axis) for axis in range(self.ndim)]

    # -- cells ---------------------------------------------------------------

    @lru_cache(maxsize=8)
    def cell_quadrature(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        Physical Gauss points and Jacobian-weighted weights of every cell

        Returns:
            points (ndim, Q, *padded) and weights (Q, *padded); the weights of
            a cell sum to its volume.
        """
        ref_points, ref_weights = quadrature_rule(n).tensor(self.ndim)
        points, weights = [], []
        for ref, w in zip(ref_points, ref_weights):
            points.append(_ruled_eval(self.vertices, ref))
            jac = np.stack([_ruled_eval(self.vertices, ref, derivative=d) for d in range(self.ndim)], axis=1)
            det = np.linalg.det(np.moveaxis(jac, (0, 1), (-2, -1)))
            bad = det <= 0.0
            if np.any(bad):
                cell = np.argwhere(bad)[0]
                raise FoldedGridError(cell - self.ng, det[tuple(cell)])
            weights.append(w * det)
        return np.stack(points, axis=1), np.stack(weights, axis=0)

    def _smallest_edges(self) -> np.ndarray:
        ds = np.full(self.padded, np.inf)
        for axis in range(self.ndim):
            diff = np.diff(self.vertices, axis=1 + axis)
            length = np.sqrt(np.sum(diff ** 2, axis=0))
            for corner in itertools.product((0, 1), repeat=self.ndim):
                if corner[axis]:
                    continue
                sl = tuple(slice(None) if d == axis else slice(corner[d], corner[d] + self.padded[d])
                           for d in range(self.ndim))
                ds = np.minimum(ds, length[sl])
        return ds

    # -- faces ---------------------------------------------------------------

    def _face_metrics(self, axis: int) -> Dict[str, np.ndarray]:
        tangents_axes = _face_tangent_axes(self.ndim, axis)
        ref_points, ref_weights = self.quadrature.tensor(self.ndim - 1)
        points, normals, sqrt_a = [], [], []
        for ref_face in ref_points:
            ref = np.zeros(self.ndim)
            others = [d for d in range(self.ndim) if d != axis]
            ref[others] = ref_face
            points.append(_ruled_eval(self.vertices, ref, face_axis=axis))
            normal, metric = self._normal(ref, axis, tangents_axes)
            normals.append(normal)
            sqrt_a.append(metric)

        points = np.stack(points, axis=1)
        normals = np.stack(normals, axis=1)
        sqrt_a = np.stack(sqrt_a, axis=0)
        if np.any(sqrt_a <= 1e-300):
            face = np.argwhere(sqrt_a <= 1e-300)[0][1:]
            raise DegenerateFaceError(f"Face {tuple(face - self.ng)} on axis {axis} has a zero tangent")
        weights = ref_weights.reshape((-1,) + (1,) * self.ndim) * sqrt_a
        return {
            "points": points,
            "normals": normals,
            "sqrt_a": sqrt_a,
            "weights": weights,
            "measure": weights.sum(axis=0),
            "area_vector": np.einsum("dk...,k...->d...", normals, weights),
        }

    def _normal(self, ref, axis, tangents_axes):
        face_shape = list(self.padded)
        face_shape[axis] += 1
        normal = np.zeros((3,) + tuple(face_shape))
        if self.ndim == 1:
            normal[0] = 1.0
            return normal, np.ones(face_shape)
        tangents = [_ruled_eval(self.vertices, ref, derivative=b, face_axis=axis) for b in tangents_axes]
        if self.ndim == 2:
            t = tangents[0]
            if axis == 0:
                vec = np.stack([t[1], -t[0]])
            else:
                vec = np.stack([-t[1], t[0]])
        else:
            vec = np.cross(tangents[0], tangents[1], axis=0)
        metric = np.sqrt(np.sum(vec ** 2, axis=0))
        safe = np.where(metric > 0, metric, 1.0)
        normal[: self.ndim] = vec / safe
        return normal, metric

    # -- views ---------------------------------------------------------------

    def interior_faces(self, axis: int) -> Tuple[slice, ...]:
        """Slice of a face array selecting the faces of the interior cells."""
        return tuple(
            slice(self.ng, self.ng + n + 1) if d == axis else slice(self.ng, self.ng + n)
            for d, n in enumerate(self.dims)
        )

    def interior_volume(self) -> np.ndarray:
        return self.volume[self.interior]

    def domain_measure(self) -> float:
        return float(self.interior_volume().sum())


def build_grid(descriptor: GridDescriptor) -> MappedGrid:
    """
    Place all vertices (ghost vertices included) and precompute metrics

    Args:
        descriptor: Grid kind, cell counts, extents and mapping parameters

    Returns:
        MappedGrid with cached cell and face geometry

    Raises:
        FoldedGridError: if any cell has a non-positive Jacobian
    """
    if any(n <= 0 for n in descriptor.dims):
        raise ValueError(f"Cell counts must be positive, got {descriptor.dims}")
    if not np.all(np.isfinite([descriptor.beta, *(descriptor.lengths or ())])):
        raise ValueError("Mapping parameters must be finite")

    ng = GHOST_LAYERS
    axes = []
    for lo, hi, n in zip(descriptor.lower, descriptor.upper, descriptor.dims):
        h = (hi - lo) / n
        axes.append(lo + h * np.arange(-ng, n + ng + 1))
    xc = np.stack(np.meshgrid(*axes, indexing="ij"))
    vertices = mapping_for(descriptor)(xc)

    grid = MappedGrid(descriptor, vertices)
    logger.info(f"Built {descriptor.kind} grid {'x'.join(map(str, descriptor.dims))} "
                f"(beta={descriptor.beta}, measure={grid.domain_measure():.6g})")
    return grid


def cell_geometry(grid: MappedGrid, index: Tuple[int, ...]) -> CellGeometry:
    """Volume, centroid and smallest edge of an interior cell."""
    p = tuple(i + grid.ng for i in index)
    return CellGeometry(
        volume=float(grid.volume[p]),
        centroid=tuple(float(c) for c in grid.centroid[(slice(None),) + p]),
        ds=float(grid.ds[p]),
    )


def face_geometry(grid: MappedGrid, axis: int, index: Tuple[int, ...]) -> FaceGeometry:
    """
    Metric data of one face

    Args:
        grid: The grid
        axis: Normal direction family of the face
        index: Interior-based index; along `axis` index i is the face between
            cells i-1 and i (0 is the lower boundary)
    """
    p = tuple(i + grid.ng for i in index)
    face = grid.faces[axis]
    return FaceGeometry(
        points=face["points"][(slice(None), slice(None)) + p],
        normals=face["normals"][(slice(None), slice(None)) + p],
        sqrt_a=face["sqrt_a"][(slice(None),) + p],
        weights=face["weights"][(slice(None),) + p],
        measure=float(face["measure"][p]),
    )


def outward_area_sum(grid: MappedGrid) -> np.ndarray:
    """Sum of outward area vectors over the faces of every interior cell (ideally zero)."""
    total = np.zeros((3,) + grid.dims)
    for axis in range(grid.ndim):
        area = grid.faces[axis]["area_vector"][(slice(None),) + grid.interior_faces(axis)]
        upper = tuple(slice(1, None) if d == axis else slice(None) for d in range(grid.ndim))
        lower = tuple(slice(None, -1) if d == axis else slice(None) for d in range(grid.ndim))
        total += area[(slice(None),) + upper] - area[(slice(None),) + lower]
    return total


def cell_averages(func: Callable[[np.ndarray], np.ndarray], grid: MappedGrid, n: int = 5,
                  padded: bool = False) -> np.ndarray:
    """
    Cell averages of a pointwise function by n-point Gauss quadrature

    Args:
        func: Maps points (ndim, ...) to values (nvar, ...)
        grid: The grid
        n: Gauss nodes per direction
        padded: Also average over ghost cells

    Returns:
        (nvar, *dims) or (nvar, *padded) averages
    """
    points, weights = grid.cell_quadrature(n)
    if not padded:
        sl = (slice(None), slice(None)) + grid.interior
        points, weights = points[sl], weights[(slice(None),) + grid.interior]
    values = func(points)
    return np.einsum("vq...,q...->v...", values, weights) / weights.sum(axis=0)


def face_difference(face_totals: np.ndarray, axis: int) -> np.ndarray:
    """Upper-face minus lower-face totals of every cell; the leading axis holds variables."""
    spatial = face_totals.ndim - 1
    upper = tuple(slice(1, None) if d == axis else slice(None) for d in range(spatial))
    lower = tuple(slice(None, -1) if d == axis else slice(None) for d in range(spatial))
    return face_totals[(slice(None),) + upper] - face_totals[(slice(None),) + lower]
