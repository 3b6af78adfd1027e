"""
Exception types shared by the solver modules
"""
from typing import Optional, Sequence

import numpy as np


class SolverError(Exception):
    """Base class for failures raised by the numerical core."""


class PositivityError(SolverError):
    """
    Density or pressure dropped to zero or below

    cell is a cell index, or a face index when axis is set. node is the
    quadrature node of a reconstructed value (None for cell averages).
    """

    def __init__(self, cell: Sequence[int], state: np.ndarray, stage: Optional[int] = None,
                 axis: Optional[int] = None, node: Optional[int] = None):
        self.cell = tuple(int(c) for c in cell)
        self.state = np.asarray(state, dtype=float)
        self.stage = stage
        self.axis = axis
        self.node = node
        where = f"cell {self.cell}" if axis is None else f"face {self.cell} (axis {axis})"
        if node is not None:
            where += f", node {node}"
        if stage is not None:
            where += f" (stage {stage})"
        values = ", ".join(f"{v:.6g}" for v in self.state)
        super().__init__(f"Positivity failure in {where}: state = [{values}]")


class FoldedGridError(SolverError):
    """A cell of the mapped grid has a non-positive Jacobian."""

    def __init__(self, cell: Sequence[int], jacobian: float):
        self.cell = tuple(int(c) for c in cell)
        self.jacobian = float(jacobian)
        super().__init__(f"Folded grid: cell {self.cell} has Jacobian {self.jacobian:.6g}")


class DegenerateFaceError(SolverError):
    """A face has a vanishing tangent vector."""


class ReconstructionError(SolverError):
    """Least-squares stencil is rank deficient."""


class OutputError(SolverError):
    """Writing a result file failed."""

    def __init__(self, path, reason: str):
        self.path = str(path)
        super().__init__(f"Could not write {self.path}: {reason}")


class ConfigError(ValueError):
    """Invalid, unknown or missing configuration key."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")
