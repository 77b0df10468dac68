import numpy as np
import pytest

from levelflow.errors import EmptyMesh, MultipleComponents
from levelflow.grid import ScalarField, make_grid
from levelflow.measures import (
    component_count,
    enclosed_measure,
    extract_front,
    front_measure,
    front_vertices,
    isoperimetric_ratio,
)
from levelflow.shapes import Sphere, Union, init_field

from conftest import field_from


def test_circle_front_length_and_area():
    grid = make_grid(2, [[-1.0, 1.0], [-1.0, 1.0]], [256, 256])
    f = init_field(Sphere(center=(0.0, 0.0), radius=0.6), grid)
    mesh = extract_front(f)
    assert front_measure(mesh) == pytest.approx(2 * np.pi * 0.6, rel=0.01)
    assert enclosed_measure(f) == pytest.approx(np.pi * 0.36, rel=0.02)


def test_circle_front_is_single_closed_polyline():
    grid = make_grid(2, [[-1.0, 1.0], [-1.0, 1.0]], [128, 128])
    f = init_field(Sphere(center=(0.1, -0.2), radius=0.5), grid)
    mesh = extract_front(f)
    assert len(mesh.polylines) == 1
    assert mesh.closed == [True]
    # vertices sit on the zero level set of the signed distance
    v = mesh.polylines[0]
    r = np.hypot(v[:, 0] - 0.1, v[:, 1] + 0.2)
    assert np.abs(r - 0.5).max() < grid.h


def test_two_circles_two_components():
    grid = make_grid(2, [[-1.0, 1.0], [-1.0, 1.0]], [128, 128])
    f = init_field(
        Union(
            members=(
                Sphere(center=(-0.5, 0.0), radius=0.25),
                Sphere(center=(0.5, 0.0), radius=0.25),
            )
        ),
        grid,
    )
    assert component_count(f) == 2
    mesh = extract_front(f)
    assert len(mesh.polylines) == 2
    assert mesh.closed == [True, True]
    with pytest.raises(MultipleComponents):
        isoperimetric_ratio(f)


def test_isoperimetric_ratio_circle_near_one():
    grid = make_grid(2, [[-1.0, 1.0], [-1.0, 1.0]], [256, 256])
    f = init_field(Sphere(center=(0.0, 0.0), radius=0.6), grid)
    assert isoperimetric_ratio(f) == pytest.approx(1.0, abs=0.05)


def test_saddle_cells_chain_consistently():
    # f = xy has saddle cells at the origin; extraction must still produce
    # well-formed polylines with matched endpoints
    grid = make_grid(2, [[-1.0, 1.0], [-1.0, 1.0]], [64, 64])
    f = field_from(grid, lambda x, y: x * y + 1e-9)
    mesh = extract_front(f)
    assert mesh.polylines
    for poly, closed in zip(mesh.polylines, mesh.closed):
        assert len(poly) >= 2
        if closed:
            assert np.allclose(poly[0], poly[-1]) or len(poly) > 2


def test_empty_front_raises():
    grid = make_grid(2, [[-1.0, 1.0], [-1.0, 1.0]], [32, 32])
    f = ScalarField(grid, -np.ones(grid.shape))
    mesh = extract_front(f)
    assert mesh.empty
    with pytest.raises(EmptyMesh):
        front_measure(mesh)
    with pytest.raises(EmptyMesh):
        isoperimetric_ratio(f)
    assert component_count(f) == 0
    assert enclosed_measure(f) == 0.0


def test_sphere_front_area_and_volume():
    grid = make_grid(3, [[-1.0, 1.0]] * 3, [96] * 3)
    f = init_field(Sphere(center=(0.0, 0.0, 0.0), radius=0.6), grid)
    mesh = extract_front(f)
    assert front_measure(mesh) == pytest.approx(4 * np.pi * 0.36, rel=0.02)
    assert enclosed_measure(f) == pytest.approx(4 / 3 * np.pi * 0.216, rel=0.02)
    # watertight triangle mesh: every edge is shared by exactly two faces
    edges = {}
    for tri in mesh.faces:
        for a, b in ((0, 1), (1, 2), (2, 0)):
            e = tuple(sorted((int(tri[a]), int(tri[b]))))
            edges[e] = edges.get(e, 0) + 1
    assert set(edges.values()) == {2}


def test_front_vertices_concatenates(grid2d, circle64):
    mesh = extract_front(circle64)
    v = front_vertices(mesh)
    assert v.ndim == 2 and v.shape[1] == 2
    assert len(v) >= len(mesh.polylines[0])


def test_enclosed_measure_halfplane(grid2d):
    f = field_from(grid2d, lambda x, y: -x)
    # half of the domain area (4.0), up to one cell layer at the interface
    assert enclosed_measure(f) == pytest.approx(2.0, rel=0.05)
