"""
Reconstruction - mean-preserving least-squares polynomials with WENO limiting

Each cell carries a polynomial of degree <= 2 written in zero-mean monomials of
the scaled local coordinate xi = (x - c_i) / h_i, so its average over the cell
is the stored cell average by construction. Coefficients come from a weighted
least-squares fit of the neighbours' averages (all face, edge and corner
neighbours); the fit matrices are pseudo-inverted once at setup.
"""
import itertools
import logging
from typing import List, Sequence, Tuple

import numpy as np

from core.errors import ReconstructionError
from core.geometry import MappedGrid

logger = logging.getLogger(__name__)

EXPONENTS = {
    1: [(1,), (2,)],
    2: [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)],
    3: [(1, 0, 0), (0, 1, 0), (0, 0, 1), (2, 0, 0), (0, 2, 0), (0, 0, 2),
        (1, 1, 0), (1, 0, 1), (0, 1, 1)],
}

CENTRAL_WEIGHT = 100.0
MOMENT_NODES = 3
STRETCH_WARNING = 10.0


def _indicator_weights(exponents) -> np.ndarray:
    """Squared-derivative weights of each basis function over [-1/2, 1/2]^d."""
    weights = []
    for exps in exponents:
        degree = sum(exps)
        if degree == 1:
            weights.append(1.0)
        elif max(exps) == 2:
            weights.append(13.0 / 3.0)
        else:
            weights.append(7.0 / 6.0)
    return np.array(weights)


def monomials(xi: np.ndarray, exponents) -> np.ndarray:
    """Monomials of xi (d, ...) -> (m, ...)."""
    out = []
    for exps in exponents:
        term = np.ones_like(xi[0])
        for k, e in enumerate(exps):
            if e:
                term = term * xi[k] ** e
        out.append(term)
    return np.stack(out)


def monomial_gradients(xi: np.ndarray, exponents) -> np.ndarray:
    """Derivatives d/dxi_j of each monomial -> (d, m, ...)."""
    d = xi.shape[0]
    out = np.zeros((d, len(exponents)) + xi.shape[1:])
    for m, exps in enumerate(exponents):
        for j in range(d):
            if exps[j] == 0:
                continue
            term = exps[j] * np.ones_like(xi[0])
            for k, e in enumerate(exps):
                power = e - 1 if k == j else e
                if power:
                    term = term * xi[k] ** power
            out[j, m] = term
    return out


class CellPolynomials:
    """
    Reconstructed polynomials of a multi-variable field

    means: (nvar, *box) cell averages; coeffs: (nvar, m, *box) coefficients of
    the zero-mean basis, on the reconstruction box (interior cells plus one
    ghost layer).
    """

    def __init__(self, operator: "LeastSquaresReconstruction", means: np.ndarray, coeffs: np.ndarray):
        self.operator = operator
        self.means = means
        self.coeffs = coeffs

    @property
    def nvar(self) -> int:
        return self.means.shape[0]

    def select(self, variables: Sequence[int]) -> "CellPolynomials":
        return CellPolynomials(self.operator, self.means[list(variables)], self.coeffs[list(variables)])

    def _side(self, selection):
        sl = (slice(None),) + selection
        return self.means[sl], self.coeffs[(slice(None), slice(None)) + selection]

    def face_traces(self, axis: int) -> Tuple[np.ndarray, np.ndarray]:
        """Traces (nvar, K, *faces) from the lower and higher cell of every interior face."""
        op = self.operator
        traces = []
        for selection, basis in ((op.left_cells[axis], op.face_basis_left[axis]),
                                 (op.right_cells[axis], op.face_basis_right[axis])):
            means, coeffs = self._side(selection)
            traces.append(means[:, None] + np.einsum("vm...,mk...->vk...", coeffs, basis))
        return traces[0], traces[1]

    def face_gradients(self, axis: int) -> Tuple[np.ndarray, np.ndarray]:
        """Physical gradients (nvar, d, K, *faces) from both sides of every interior face."""
        op = self.operator
        grads = []
        for selection, basis in ((op.left_cells[axis], op.face_grad_left[axis]),
                                 (op.right_cells[axis], op.face_grad_right[axis])):
            _, coeffs = self._side(selection)
            grads.append(np.einsum("vm...,dmk...->vdk...", coeffs, basis))
        return grads[0], grads[1]

    def volume_values(self) -> np.ndarray:
        means, coeffs = self._side(self.operator.inner_cells)
        return means[:, None] + np.einsum("vm...,mq...->vq...", coeffs, self.operator.volume_basis)

    def volume_gradients(self) -> np.ndarray:
        _, coeffs = self._side(self.operator.inner_cells)
        return np.einsum("vm...,dmq...->vdq...", coeffs, self.operator.volume_grad)

    def laplacian(self) -> np.ndarray:
        """Laplacian (nvar, *box), constant per cell for degree-2 polynomials."""
        op = self.operator
        squares = self.coeffs[:, op.square_index]
        return 2.0 * squares.sum(axis=1) / op.scale[None] ** 2

    def interior_means(self) -> np.ndarray:
        return self.means[(slice(None),) + self.operator.inner_cells]


class LeastSquaresReconstruction:
    """
    Precomputed least-squares reconstruction operator for one grid

    Args:
        grid: The mapped grid
        weno: Combine the central fit with one-sided linear fits (CWENO)
    """

    def __init__(self, grid: MappedGrid, weno: bool = True):
        self.grid = grid
        self.weno = weno
        d = grid.ndim
        self.ndim = d
        self.exponents = EXPONENTS[d]
        self.nbasis = len(self.exponents)
        self.indicator_weights = _indicator_weights(self.exponents)
        self.square_index = [m for m, e in enumerate(self.exponents) if max(e) == 2]

        ng = grid.ng
        self.box = tuple(slice(ng - 1, ng + n + 1) for n in grid.dims)
        self.box_shape = tuple(n + 2 for n in grid.dims)
        self.inner_cells = tuple(slice(1, n + 1) for n in grid.dims)
        self.offsets = [o for o in itertools.product((-1, 0, 1), repeat=d) if any(o)]

        self.center = grid.centroid[(slice(None),) + self.box]
        self.scale = grid.volume[self.box] ** (1.0 / d)
        self.ds = grid.ds[self.box]

        points, weights = grid.cell_quadrature(MOMENT_NODES)
        self.own_means = self._moments(points, weights, (0,) * d)
        fit = np.stack([self._moments(points, weights, o) - self.own_means for o in self.offsets])
        distance = np.stack([
            np.sqrt(np.sum((grid.centroid[(slice(None),) + self.neighbor(o)] - self.center) ** 2, axis=0))
            for o in self.offsets
        ])
        self.distance_weights = 1.0 / distance

        # stacked matrices with the cell axes leading
        fit_cells = np.moveaxis(fit, (0, 1), (-2, -1))
        w_cells = np.moveaxis(self.distance_weights, 0, -1)
        weighted = w_cells[..., None] * fit_cells
        rank = np.linalg.matrix_rank(weighted)
        if np.any(rank < self.nbasis):
            cell = np.argwhere(rank < self.nbasis)[0] - 1
            raise ReconstructionError(f"Least-squares stencil of cell {tuple(cell)} is rank deficient")
        self.central = np.moveaxis(np.linalg.pinv(weighted) * w_cells[..., None, :], (-2, -1), (0, 1))

        self.one_sided = []
        for axis in range(d):
            for side in (-1, 1):
                mask = np.array([o[axis] != -side for o in self.offsets], dtype=float)
                w_side = w_cells * mask
                lin = w_side[..., None] * fit_cells[..., :d]
                pinv = np.linalg.pinv(lin) * w_side[..., None, :]
                self.one_sided.append(np.moveaxis(pinv, (-2, -1), (0, 1)))

        self._check_stretching()
        self._precompute_evaluation()
        logger.info(f"Reconstruction ready: {len(self.offsets)} neighbours, {self.nbasis} basis functions, "
                    f"weno={'on' if weno else 'off'}")

    def neighbor(self, offset) -> Tuple[slice, ...]:
        """Padded-array slice of the neighbour at `offset` for every box cell."""
        ng = self.grid.ng
        return tuple(slice(ng - 1 + o, ng + n + 1 + o) for o, n in zip(offset, self.grid.dims))

    def _local(self, points: np.ndarray, selection=None) -> np.ndarray:
        center, scale = self.center, self.scale
        if selection is not None:
            center = center[(slice(None),) + selection]
            scale = scale[selection]
        return (points - center[:, None]) / scale[None, None]

    def _moments(self, points, weights, offset) -> np.ndarray:
        sl = self.neighbor(offset)
        pts = points[(slice(None), slice(None)) + sl]
        w = weights[(slice(None),) + sl]
        basis = monomials(self._local(pts), self.exponents)
        return np.einsum("mq...,q...->m...", basis, w) / w.sum(axis=0)

    def _check_stretching(self):
        ratios = []
        for o in self.offsets:
            ratios.append(self.grid.ds[self.neighbor(o)] / self.ds)
        worst = float(np.max(np.maximum(np.max(ratios, axis=0), 1.0 / np.min(ratios, axis=0))))
        if worst > STRETCH_WARNING:
            logger.warning(f"Stencil edge-length ratio {worst:.1f} exceeds {STRETCH_WARNING}; "
                           f"least-squares accuracy may degrade on stretched cells")

    def _precompute_evaluation(self):
        grid = self.grid
        self.left_cells, self.right_cells = [], []
        self.face_basis_left, self.face_basis_right = [], []
        self.face_grad_left, self.face_grad_right = [], []
        for axis in range(self.ndim):
            faces = grid.interior_faces(axis)
            points = grid.faces[axis]["points"][(slice(None), slice(None)) + faces]
            left = tuple(slice(0, n + 1) if d == axis else slice(1, n + 1) for d, n in enumerate(grid.dims))
            right = tuple(slice(1, n + 2) if d == axis else slice(1, n + 1) for d, n in enumerate(grid.dims))
            self.left_cells.append(left)
            self.right_cells.append(right)
            for selection, basis_list, grad_list in ((left, self.face_basis_left, self.face_grad_left),
                                                     (right, self.face_basis_right, self.face_grad_right)):
                xi = self._local(points, selection)
                means = self.own_means[(slice(None),) + selection]
                basis_list.append(monomials(xi, self.exponents) - means[:, None])
                grad_list.append(monomial_gradients(xi, self.exponents) / self.scale[selection][None, None, None])

        points = grid.vol_points[(slice(None), slice(None)) + grid.interior]
        xi = self._local(points, self.inner_cells)
        means = self.own_means[(slice(None),) + self.inner_cells]
        self.volume_basis = monomials(xi, self.exponents) - means[:, None]
        self.volume_grad = monomial_gradients(xi, self.exponents) / self.scale[self.inner_cells][None, None, None]

    # -- fitting -------------------------------------------------------------

    def differences(self, field: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Box averages (nvar, *box) and neighbour differences (nvar, K, *box)."""
        means = field[(slice(None),) + self.box]
        diffs = np.stack([field[(slice(None),) + self.neighbor(o)] - means for o in self.offsets], axis=1)
        return means, diffs

    def central_fit(self, diffs: np.ndarray) -> np.ndarray:
        return np.einsum("mk...,vk...->vm...", self.central, diffs)

    def one_sided_fits(self, diffs: np.ndarray) -> List[np.ndarray]:
        return [np.einsum("jk...,vk...->vj...", matrix, diffs) for matrix in self.one_sided]

    def indicator_floor(self, field: np.ndarray) -> np.ndarray:
        scale = np.max(np.abs(field.reshape(field.shape[0], -1)), axis=1)
        return self.ds[None] ** 2 * scale.reshape((-1,) + (1,) * self.ndim) ** 2 + 1e-40


def weno_limit(central: np.ndarray, one_sided: List[np.ndarray], floor: np.ndarray,
               indicator_weights: np.ndarray) -> np.ndarray:
    """
    Combine a central degree-2 fit with one-sided linear fits (CWENO)

    Args:
        central: (nvar, m, ...) coefficients of the central fit
        one_sided: list of (nvar, d, ...) linear coefficients
        floor: (nvar, ...) small positive constant added to the indicators
        indicator_weights: (m,) squared-derivative weights of the basis

    Returns:
        (nvar, m, ...) limited coefficients; equal to `central` when all
        nonlinear weights equal the linear ones
    """
    d = one_sided[0].shape[1]
    total = CENTRAL_WEIGHT + len(one_sided)
    gamma0, gamma = CENTRAL_WEIGHT / total, 1.0 / total

    base = central.copy()
    for fit in one_sided:
        base[:, :d] -= gamma * fit
    base /= gamma0

    def indicator(coeffs):
        w = indicator_weights[: coeffs.shape[1]]
        return np.einsum("m,vm...->v...", w, coeffs ** 2)

    omegas = [gamma0 / (floor + indicator(base)) ** 2]
    omegas += [gamma / (floor + indicator(fit)) ** 2 for fit in one_sided]
    norm = sum(omegas)

    limited = (omegas[0] / norm)[:, None] * base
    for omega, fit in zip(omegas[1:], one_sided):
        limited[:, :d] += (omega / norm)[:, None] * fit
    return limited


def reconstruct(field: np.ndarray, operator: LeastSquaresReconstruction) -> CellPolynomials:
    """
    Build the polynomials of every cell of the reconstruction box

    Args:
        field: (nvar, *padded) cell averages with ghost layers filled
        operator: Precomputed reconstruction for the field's grid

    Returns:
        CellPolynomials (mean preserving; WENO limited if the operator says so)
    """
    means, diffs = operator.differences(field)
    coeffs = operator.central_fit(diffs)
    if operator.weno:
        coeffs = weno_limit(coeffs, operator.one_sided_fits(diffs), operator.indicator_floor(field),
                            operator.indicator_weights)
    return CellPolynomials(operator, means, coeffs)


def interface_states(polynomials: CellPolynomials, axis: int) -> Tuple[np.ndarray, np.ndarray]:
    """(q-, q+) at the quadrature nodes of every interior face normal to `axis`."""
    return polynomials.face_traces(axis)


def derivative_averages(polynomials: CellPolynomials, grid: MappedGrid) -> np.ndarray:
    """
    Cell averages of d/dx from averaged interface traces (1D)

    Returns:
        (nvar, nx) values of [q(x_{i+1/2}) - q(x_{i-1/2})] / dx with q at a face
        taken as the mean of its two traces
    """
    left, right = polynomials.face_traces(0)
    face = 0.5 * (left[:, 0] + right[:, 0])
    return np.diff(face, axis=1) / grid.volume[grid.interior][None]
