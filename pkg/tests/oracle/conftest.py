import pytest

from iceemu.mesh.mesh import triangulate_rectangle
from iceemu.oracle.fields import OracleConfig, calibrate_oracle


@pytest.fixture
def mesh():
    return triangulate_rectangle(25.0, 200.0, 150.0, jitter_fraction=0.2, seed=11)


@pytest.fixture
def config(mesh):
    return calibrate_oracle(OracleConfig(), mesh)
