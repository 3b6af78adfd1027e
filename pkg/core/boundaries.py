"""
Boundaries - ghost-layer filling for cell-average fields

Rules are given per axis as (lower, upper) pairs. Axes are filled in order
over the full padded extent of the other axes, so edge and corner ghosts end
up consistent with the last axis filled.
"""
import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from core.geometry import MappedGrid

logger = logging.getLogger(__name__)

PERIODIC = "periodic"
PERIODIC_SHIFT = "periodic_shift"
OUTFLOW = "outflow"
INFLOW = "inflow"
LINEAR = "linear"
RULES = (PERIODIC, PERIODIC_SHIFT, OUTFLOW, INFLOW, LINEAR)

SideRules = Tuple[str, str]


def _index(ndim: int, axis: int, position) -> Tuple:
    sl = [slice(None)] * (ndim + 1)
    sl[axis + 1] = position
    return tuple(sl)


def apply_boundaries(field: np.ndarray, grid: MappedGrid, rules: Sequence[SideRules],
                     frozen: Optional[np.ndarray] = None,
                     jumps: Optional[Sequence[np.ndarray]] = None) -> np.ndarray:
    """
    Fill the ghost layers of a cell-average field in place

    Args:
        field: (nvar, *padded) array; interior values are left untouched
        grid: The grid
        rules: (lower, upper) rule names per axis
        frozen: (nvar, *padded) values used by inflow ghosts
        jumps: Per axis (nvar,) constant jump A(x + L e_d) - A(x), used by periodic_shift

    Returns:
        The same array, for chaining
    """
    if len(rules) != grid.ndim:
        raise ValueError(f"Expected boundary rules for {grid.ndim} axes, got {len(rules)}")
    ng, nd = grid.ng, grid.ndim
    for axis, (lower, upper) in enumerate(rules):
        n = grid.dims[axis]
        for side, rule in (("lower", lower), ("upper", upper)):
            if rule not in RULES:
                raise ValueError(f"Unknown boundary rule '{rule}'")
            for layer in range(1, ng + 1):
                if side == "lower":
                    ghost, first, second, wrapped = ng - layer, ng, ng + 1, ng - layer + n
                else:
                    ghost, first, second, wrapped = ng + n - 1 + layer, ng + n - 1, ng + n - 2, ng - 1 + layer
                target = _index(nd, axis, ghost)

                if rule in (PERIODIC, PERIODIC_SHIFT):
                    value = field[_index(nd, axis, wrapped)]
                    if rule == PERIODIC_SHIFT:
                        if jumps is None:
                            raise ValueError("periodic_shift needs the per-axis jumps")
                        shift = np.asarray(jumps[axis], dtype=float).reshape((-1,) + (1,) * (nd - 1))
                        value = value - shift if side == "lower" else value + shift
                elif rule == OUTFLOW:
                    value = field[_index(nd, axis, first)]
                elif rule == INFLOW:
                    if frozen is None:
                        raise ValueError("inflow boundaries need frozen ghost values")
                    value = frozen[target]
                else:
                    value = (1 + layer) * field[_index(nd, axis, first)] - layer * field[_index(nd, axis, second)]
                field[target] = value
    return field
