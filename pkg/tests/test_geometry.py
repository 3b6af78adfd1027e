import numpy as np
import pytest

from core.errors import FoldedGridError
from core.geometry import (GridDescriptor, MappedGrid, build_grid, cell_averages, cell_geometry,
                           colella_mapping, face_geometry, outward_area_sum)
from tests.conftest import make_grid


def test_cartesian_cell_area():
    grid = make_grid((2, 4))
    assert grid.is_cartesian
    assert np.allclose(grid.interior_volume(), 0.125)
    assert cell_geometry(grid, (1, 2)).centroid == pytest.approx((0.75, 0.625))


def test_unit_cube_cell():
    grid = make_grid((1, 1, 1))
    assert cell_geometry(grid, (0, 0, 0)).volume == pytest.approx(1.0)
    face = face_geometry(grid, 0, (0, 0, 0))
    assert face.measure == pytest.approx(1.0)
    assert np.allclose(face.sqrt_a, 1.0)
    assert np.allclose(face.normals[:, 0], [1.0, 0.0, 0.0])


def test_cartesian_face_normal_and_measure():
    grid = make_grid((2, 2))
    face = face_geometry(grid, 0, (1, 0))
    assert face.measure == pytest.approx(0.5)
    assert np.allclose(face.normals[0], 1.0)
    assert np.allclose(face.normals[1:], 0.0)


def test_colella_mapping_point():
    x = colella_mapping(np.array([[0.25], [0.25]]), 0.1, (1.0, 1.0))
    assert np.allclose(x[:, 0], [0.35, 0.35])


def test_sheared_parallelogram_area():
    descriptor = GridDescriptor(kind="colella", beta=0.1, dims=(1, 1), lower=(0.0, 0.0), upper=(1.0, 1.0))
    reference = build_grid(descriptor.model_copy(update={"kind": "cartesian", "beta": 0.0}))
    vertices = reference.vertices.copy()
    vertices[0] += 0.2 * vertices[1]
    grid = MappedGrid(descriptor, vertices)
    assert grid.volume[grid.interior][0, 0] == pytest.approx(1.0)


def test_mapped_grid_closes_every_cell(mapped_grid):
    assert np.all(mapped_grid.interior_volume() > 0)
    assert np.max(np.abs(outward_area_sum(mapped_grid))) < 1e-13
    assert mapped_grid.domain_measure() == pytest.approx(1.0)


def test_small_beta_matches_cartesian():
    cartesian = make_grid((6, 6))
    mapped = make_grid((6, 6), kind="colella", beta=1e-8)
    assert not mapped.is_cartesian
    assert np.allclose(mapped.volume, cartesian.volume, atol=1e-6)
    for axis in range(2):
        assert np.allclose(mapped.faces[axis]["normals"], cartesian.faces[axis]["normals"], atol=1e-6)
        assert np.allclose(mapped.faces[axis]["measure"], cartesian.faces[axis]["measure"], atol=1e-6)


def test_warped_face_length_matches_polyline():
    grid = make_grid((4, 4), kind="colella", beta=0.1, quadrature=3)
    face = face_geometry(grid, 0, (2, 1))
    # the face is a straight segment between two mapped vertices
    p = grid.ng
    start = grid.vertices[:, p + 2, p + 1]
    end = grid.vertices[:, p + 2, p + 2]
    assert face.measure == pytest.approx(np.linalg.norm(end - start), abs=1e-12)


def test_folded_grid_is_rejected():
    with pytest.raises(FoldedGridError) as info:
        make_grid((16, 16), kind="colella", beta=0.5)
    assert info.value.jacobian <= 0


def test_cell_averages_of_linear_function_hit_the_centroid(mapped_grid):
    averages = cell_averages(lambda x: np.stack([2.0 * x[0] - x[1]]), mapped_grid)
    centroid = mapped_grid.centroid[(slice(None),) + mapped_grid.interior]
    assert np.allclose(averages[0], 2.0 * centroid[0] - centroid[1], atol=1e-13)
