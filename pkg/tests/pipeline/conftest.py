import pytest

from iceemu.mesh.mesh import triangulate_rectangle
from iceemu.oracle.dataset import generate_dataset
from iceemu.oracle.fields import OracleConfig, calibrate_oracle


@pytest.fixture
def mesh():
    return triangulate_rectangle(50.0, 200.0, 150.0, jitter_fraction=0.1, seed=3)


@pytest.fixture
def oracle(mesh):
    return calibrate_oracle(OracleConfig(), mesh)


@pytest.fixture
def frames(mesh, oracle):
    return generate_dataset(mesh, oracle, [0.0, 5.0, 10.0, 15.0, 20.0, 25.0], 4)


@pytest.fixture
def train_frames(frames):
    return frames.subset([5.0, 15.0, 25.0])


@pytest.fixture
def val_frames(frames):
    return frames.subset([10.0])
