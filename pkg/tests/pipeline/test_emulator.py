import numpy as np
import pytest

from iceemu.common.errors import ArtifactError
from iceemu.mesh.graph import GraphOptions
from iceemu.models.fcn import FcnConfig
from iceemu.models.gcn import GcnConfig
from iceemu.models.grid import GridSpec
from iceemu.nn.artifact import ModelArtifact, decode_artifact, encode_artifact
from iceemu.pipeline.emulator import FcnEmulator, GcnEmulator, TargetEmulator, build_emulator, load_emulator
from iceemu.pipeline.normalization import fit_normalization


@pytest.fixture
def norm(train_frames):
    return fit_normalization(train_frames)


def _artifact(emulator):
    return ModelArtifact(emulator.kind, emulator.meta(), emulator.model.params, emulator.norm.to_arrays())


def test_target_emulator_returns_frames(frames):
    emulator = TargetEmulator(frames)
    np.testing.assert_array_equal(emulator.predict(10.0, 2), frames.fields[2, 2])
    np.testing.assert_array_equal(emulator.predict_frames(frames), frames.fields)


def test_gcn_emulator_predicts_per_node(mesh, norm):
    emulator = build_emulator("gcn", mesh, norm, GcnConfig(hidden_width=8, num_graph_layers=2))
    assert isinstance(emulator, GcnEmulator)
    assert emulator.predict(5.0, 1).shape == (mesh.num_nodes, 3)
    assert emulator.predict_series(5.0, 3).shape == (3, mesh.num_nodes, 3)


def test_gcn_sample_is_normalized(mesh, norm, train_frames):
    emulator = build_emulator("gcn", mesh, norm, GcnConfig(hidden_width=8, num_graph_layers=2))
    inputs, targets, mask = emulator.sample(train_frames, 1, 2)
    np.testing.assert_allclose(norm.denormalize_targets(targets), train_frames.fields[1, 2], rtol=1e-12)
    np.testing.assert_allclose(norm.denormalize_inputs(inputs)[:, 3], 15.0, rtol=1e-12)
    assert mask is None


def test_fcn_input_raster(mesh, norm):
    spec = GridSpec.covering(mesh, cells=8)
    emulator = build_emulator("fcn", mesh, norm, FcnConfig(hidden_width=4, num_conv_layers=3), spec=spec)
    assert isinstance(emulator, FcnEmulator)
    raster = emulator.input_raster(15.0, 3)
    assert raster.shape == (4, *spec.shape)
    assert raster[3] == pytest.approx(np.full(spec.shape, raster[3, 0, 0]), rel=1e-12, abs=1e-12)
    assert norm.denormalize_inputs(np.array([0.0, 0.0, raster[2, 0, 0], raster[3, 0, 0]]))[3] == pytest.approx(15.0)
    assert np.all(np.diff(raster[0], axis=1) > 0)
    assert emulator.predict(15.0, 3).shape == (mesh.num_nodes, 3)
    centers = norm.normalize_inputs(np.column_stack([spec.cell_centers(), np.zeros((spec.nx * spec.ny, 2))]))
    valid = emulator.raster.mask.ravel()
    np.testing.assert_allclose(raster[0].ravel()[valid], centers[valid, 0], rtol=1e-10, atol=1e-10)


def test_fcn_sample_carries_mask(mesh, norm, train_frames):
    spec = GridSpec.covering(mesh, cells=8)
    emulator = build_emulator("fcn", mesh, norm, FcnConfig(hidden_width=4, num_conv_layers=3), spec=spec)
    _, targets, mask = emulator.sample(train_frames, 0, 0)
    assert targets.shape == (3, *spec.shape)
    assert mask is emulator.raster.mask


@pytest.mark.parametrize("kind", ["gcn", "fcn"])
def test_artifact_reload_predicts_identically(mesh, norm, kind):
    if kind == "gcn":
        emulator = build_emulator(
            kind,
            mesh,
            norm,
            GcnConfig(hidden_width=8, num_graph_layers=2),
            graph_options=GraphOptions(kernel="exp-decay"),
        )
    else:
        emulator = build_emulator(
            kind, mesh, norm, FcnConfig(hidden_width=4, num_conv_layers=3), spec=GridSpec.covering(mesh, cells=8)
        )
    restored = load_emulator(decode_artifact(encode_artifact(_artifact(emulator))), mesh)
    assert restored.kind == kind
    np.testing.assert_array_equal(restored.predict(20.0, 2), emulator.predict(20.0, 2))


def test_incomplete_meta_rejected(mesh, norm):
    emulator = build_emulator("gcn", mesh, norm, GcnConfig(hidden_width=8, num_graph_layers=2))
    artifact = _artifact(emulator)
    del artifact.meta["graph"]
    with pytest.raises(ArtifactError, match="incomplete"):
        load_emulator(artifact, mesh)
