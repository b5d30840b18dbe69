import numpy as np
import pytest

from iceemu.common.errors import ConfigError, MeshError
from iceemu.mesh.mesh import (
    Mesh,
    locate_point,
    locate_points,
    read_mesh,
    triangulate_rectangle,
    write_mesh,
)


@pytest.fixture
def unit_square():
    coords = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    return Mesh(coords, [(0, 1, 2), (0, 2, 3)])


@pytest.fixture
def jittered():
    return triangulate_rectangle(10.0, 60.0, 40.0, jitter_fraction=0.25, seed=3)


def test_triangulate_rectangle_counts():
    mesh = triangulate_rectangle(10.0, 200.0, 150.0)
    assert mesh.num_nodes == 21 * 16
    assert mesh.num_elements == 2 * 20 * 15
    assert mesh.bounds == (0.0, 0.0, 200.0, 150.0)


def test_triangulate_rectangle_is_reproducible(jittered):
    again = triangulate_rectangle(10.0, 60.0, 40.0, jitter_fraction=0.25, seed=3)
    assert np.array_equal(jittered.node_coords, again.node_coords)
    other = triangulate_rectangle(10.0, 60.0, 40.0, jitter_fraction=0.25, seed=4)
    assert not np.array_equal(jittered.node_coords, other.node_coords)


def test_jitter_keeps_boundary_and_orientation(jittered):
    plain = triangulate_rectangle(10.0, 60.0, 40.0)
    boundary = plain.boundary_nodes
    assert np.array_equal(jittered.node_coords[boundary], plain.node_coords[boundary])
    assert np.all(jittered.signed_areas > 0)
    moved = np.hypot(*(jittered.node_coords - plain.node_coords).T)
    assert moved.max() <= 0.25 * 10.0 + 1e-12


@pytest.mark.parametrize(
    "spacing, width, height, jitter",
    [(0.0, 10.0, 10.0, 0.0), (3.0, 10.0, 9.0, 0.0), (10.0, 10.0, 20.0, 0.0), (1.0, 4.0, 4.0, 0.3)],
)
def test_triangulate_rectangle_rejects_bad_geometry(spacing, width, height, jitter):
    with pytest.raises(ConfigError):
        triangulate_rectangle(spacing, width, height, jitter_fraction=jitter)


def test_mesh_rejects_clockwise_element():
    with pytest.raises(MeshError, match="counter-clockwise"):
        Mesh([(0, 0), (1, 0), (0, 1)], [(0, 2, 1)])


def test_mesh_rejects_out_of_range_index():
    with pytest.raises(MeshError, match="outside"):
        Mesh([(0, 0), (1, 0), (0, 1)], [(0, 1, 3)])


def test_mesh_rejects_duplicate_nodes():
    coords = [(0, 0), (1, 0), (0, 1), (1, 1), (1, 1)]
    with pytest.raises(MeshError, match="coincide"):
        Mesh(coords, [(0, 1, 2), (1, 3, 2)])


def test_mesh_rejects_non_finite_coordinates():
    with pytest.raises(MeshError, match="non-finite"):
        Mesh([(0, 0), (1, np.nan), (0, 1)], [(0, 1, 2)])


def test_mesh_is_immutable(unit_square):
    with pytest.raises(ValueError):
        unit_square.node_coords[0, 0] = 5.0


def test_edges_and_boundary(unit_square):
    assert unit_square.edges.tolist() == [[0, 1], [0, 2], [0, 3], [1, 2], [2, 3]]
    assert unit_square.boundary_nodes.tolist() == [0, 1, 2, 3]
    assert len(unit_square.boundary_edges) == 4


def test_locate_point_at_centroid(unit_square):
    element, weights = locate_point(unit_square, (2.0 / 3.0, 1.0 / 3.0))
    assert element == 0
    assert weights == pytest.approx([1.0 / 3.0] * 3)


def test_locate_point_at_node_has_unit_weight(jittered):
    for node in (0, 8, 20):
        element, weights = locate_point(jittered, jittered.node_coords[node])
        local = list(jittered.elements[element]).index(node)
        assert weights[local] == pytest.approx(1.0, abs=1e-12)


def test_locate_point_shared_edge_picks_lowest_element(unit_square):
    element, weights = locate_point(unit_square, (0.5, 0.5))
    assert element == 0
    assert weights.sum() == pytest.approx(1.0)


def test_locate_point_outside_returns_none(unit_square):
    assert locate_point(unit_square, (1.5, 0.5)) is None


def test_locate_points_reproduces_linear_field(jittered):
    rng = np.random.default_rng(0)
    points = rng.uniform([0, 0], [60, 40], size=(50, 2))
    elements, weights = locate_points(jittered, points)
    assert np.all(elements >= 0)
    nodes = jittered.elements[elements]
    field = 2.0 * jittered.node_coords[:, 0] - 0.5 * jittered.node_coords[:, 1]
    interpolated = (weights * field[nodes]).sum(axis=1)
    assert interpolated == pytest.approx(2.0 * points[:, 0] - 0.5 * points[:, 1])


def _scan_all_elements(mesh, point):
    for index, element in enumerate(mesh.elements):
        a, b, c = mesh.node_coords[element]
        l1, l2 = np.linalg.solve(np.column_stack([b - a, c - a]), np.asarray(point) - a)
        if min(l1, l2, 1.0 - l1 - l2) >= -1e-9:
            return index, np.array([1.0 - l1 - l2, l1, l2])
    return -1, np.zeros(3)


def test_locate_points_agrees_with_full_scan(jittered):
    rng = np.random.default_rng(5)
    points = rng.uniform([-10, -10], [70, 50], size=(200, 2))
    elements, weights = locate_points(jittered, points)
    assert np.any(elements < 0) and np.any(elements >= 0)
    for point, element, weight in zip(points, elements, weights):
        expected, expected_weights = _scan_all_elements(jittered, point)
        assert element == expected
        assert weight == pytest.approx(expected_weights, abs=1e-9)


def test_locate_points_empty_query(jittered):
    elements, weights = locate_points(jittered, np.zeros((0, 2)))
    assert elements.shape == (0,)
    assert weights.shape == (0, 3)


def test_mesh_file_round_trip(tmp_path, jittered):
    path = tmp_path / "mesh.csv"
    write_mesh(jittered, path)
    loaded = read_mesh(path)
    assert np.array_equal(loaded.node_coords, jittered.node_coords)
    assert np.array_equal(loaded.elements, jittered.elements)


def test_read_mesh_in_meters(tmp_path):
    path = tmp_path / "mesh.csv"
    path.write_text("# mesh v1 units=m\nnodes\n0,0.0,0.0\n1,1000.0,0.0\n2,0.0,1000.0\nelements\n0,0,1,2\n")
    mesh = read_mesh(path)
    assert mesh.node_coords.tolist() == [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]


def test_read_mesh_rejects_unknown_version(tmp_path):
    path = tmp_path / "mesh.csv"
    path.write_text("# mesh v2 units=km\nnodes\n")
    with pytest.raises(MeshError) as exc_info:
        read_mesh(path)
    assert exc_info.value.row == 1


def test_read_mesh_reports_bad_row(tmp_path):
    path = tmp_path / "mesh.csv"
    path.write_text("# mesh v1 units=km\nnodes\n0,0.0,0.0\n1,abc,0.0\n")
    with pytest.raises(MeshError) as exc_info:
        read_mesh(path)
    assert exc_info.value.row == 4
