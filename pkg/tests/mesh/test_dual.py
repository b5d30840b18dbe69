import numpy as np
import pytest

from iceemu.mesh.mesh import triangulate_rectangle


@pytest.fixture
def mesh():
    return triangulate_rectangle(10.0, 50.0, 30.0, jitter_fraction=0.2, seed=7)


def test_areas_sum_to_domain(mesh):
    assert mesh.dual.areas.sum() == pytest.approx(50.0 * 30.0)
    assert np.all(mesh.dual.areas > 0)


def test_control_volumes_are_closed(mesh):
    assert np.allclose(mesh.dual.net_outward_normals(), 0.0, atol=1e-10)


def test_boundary_normals_point_outward(mesh):
    dual = mesh.dual
    centre = np.array([25.0, 15.0])
    outward = mesh.node_coords[dual.boundary_nodes] - centre
    assert np.all(np.einsum("ij,ij->i", dual.boundary_normals, outward) > 0)


def test_edge_normals_point_from_low_to_high_index(mesh):
    dual = mesh.dual
    a, b = dual.edge_nodes[:, 0], dual.edge_nodes[:, 1]
    along = mesh.node_coords[b] - mesh.node_coords[a]
    assert np.all(np.einsum("ij,ij->i", dual.edge_normals, along) > 0)
