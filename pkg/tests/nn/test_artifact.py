import numpy as np
import pytest

from iceemu.common.errors import ArtifactError
from iceemu.nn.artifact import ModelArtifact, decode_artifact, encode_artifact, read_artifact, write_artifact
from iceemu.nn.params import LayerParams, ModelParams


@pytest.fixture
def artifact():
    rng = np.random.default_rng(5)
    params = ModelParams(
        [
            LayerParams(rng.normal(size=(4, 3))),
            LayerParams(rng.normal(size=(2, 4, 3, 3)), rng.normal(size=2)),
        ]
    )
    norm = {"input_mean": np.array([1.0, 2.0]), "input_std": np.array([0.5, 0.25])}
    return ModelArtifact("fcn", {"hidden_width": 4, "kernel": "inverse-exp"}, params, norm)


def test_artifact_round_trip(tmp_path, artifact):
    path = tmp_path / "model.gemu"
    write_artifact(artifact, path)
    loaded = read_artifact(path)
    assert loaded.kind == "fcn"
    assert loaded.meta == artifact.meta
    assert loaded.params == artifact.params
    assert loaded.params.layers[0].bias is None
    assert set(loaded.norm) == {"input_mean", "input_std"}
    assert np.array_equal(loaded.norm["input_std"], artifact.norm["input_std"])


def test_encoding_is_deterministic(artifact):
    assert encode_artifact(artifact) == encode_artifact(artifact)
    assert encode_artifact(artifact).startswith(b"GEMU1\x01\x00")


def test_bad_magic_is_rejected(artifact):
    data = b"XEMU1" + encode_artifact(artifact)[5:]
    with pytest.raises(ArtifactError, match="magic"):
        decode_artifact(data)


def test_truncated_artifact_is_rejected(artifact):
    with pytest.raises(ArtifactError, match="truncated"):
        decode_artifact(encode_artifact(artifact)[:-3])


def test_unknown_kind_is_rejected():
    with pytest.raises(ArtifactError):
        ModelArtifact("mlp", {}, ModelParams([]))


def test_params_copy_is_independent(artifact):
    clone = artifact.params.copy()
    clone.layers[0].weight[0, 0] += 1.0
    assert clone != artifact.params
    clone.assign(artifact.params)
    assert clone == artifact.params
    assert artifact.params.names() == ["layer0.weight", "layer1.weight", "layer1.bias"]
