import numpy as np
import pytest

from core.geometry import GridDescriptor, build_grid
from core.mhd import conserved_from_primitive


def make_grid(dims, lower=None, upper=None, kind="cartesian", beta=0.0, periodic=None, quadrature=2):
    ndim = len(dims)
    return build_grid(GridDescriptor(
        kind=kind,
        dims=tuple(dims),
        lower=tuple(lower or (0.0,) * ndim),
        upper=tuple(upper or (1.0,) * ndim),
        beta=beta,
        periodic=tuple(periodic or (True,) * ndim),
        quadrature=quadrature,
    ))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def square_grid():
    return make_grid((8, 8))


@pytest.fixture
def mapped_grid():
    return make_grid((8, 8), kind="colella", beta=0.1)


@pytest.fixture
def line_grid():
    return make_grid((32,))


@pytest.fixture
def random_primitive(rng):
    """Admissible primitive states (8, n)."""

    def draw(n=5):
        w = np.empty((8, n))
        w[0] = rng.uniform(0.5, 2.0, n)
        w[1:4] = rng.uniform(-1.0, 1.0, (3, n))
        w[4] = rng.uniform(0.5, 2.0, n)
        w[5:8] = rng.uniform(-1.0, 1.0, (3, n))
        return w

    return draw


@pytest.fixture
def random_conserved(random_primitive):
    return lambda n=5: conserved_from_primitive(random_primitive(n))
