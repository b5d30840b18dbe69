import dataclasses

import numpy as np
import pytest

from iceemu.common.errors import ConfigError, DivergenceError
from iceemu.common.io_interface import TestIOInterface
from iceemu.models.fcn import FcnConfig
from iceemu.models.gcn import GcnConfig, GcnModel
from iceemu.models.gcn import init_params as gcn_init_params
from iceemu.models.grid import GridSpec
from iceemu.oracle.frames import FrameSet
from iceemu.pipeline.normalization import fit_normalization
from iceemu.pipeline.train import TrainConfig, derive_seeds, train

SMALL_GCN = GcnConfig(hidden_width=8, num_graph_layers=2)
SMALL_FCN = FcnConfig(hidden_width=4, num_conv_layers=3)


def test_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(kind="rnn")
    with pytest.raises(ConfigError):
        TrainConfig(epochs=0)
    with pytest.raises(ConfigError):
        TrainConfig(learning_rate=-1.0)


def test_zero_learning_rate_keeps_parameters(mesh, train_frames, val_frames):
    config = TrainConfig(epochs=3, learning_rate=0.0, seed=4)
    artifact, history = train(mesh, train_frames, val_frames, config, SMALL_GCN)
    init_seed, _ = derive_seeds(4)
    assert artifact.params == gcn_init_params(dataclasses.replace(SMALL_GCN, seed=init_seed))
    assert len(set(history.train_losses)) == 1
    assert len(set(history.val_losses)) == 1


def test_fixed_seed_is_reproducible(mesh, train_frames, val_frames):
    config = TrainConfig(epochs=3, seed=9)
    first, first_history = train(mesh, train_frames, val_frames, config, SMALL_GCN)
    second, second_history = train(mesh, train_frames, val_frames, config, SMALL_GCN)
    assert first_history.train_losses == second_history.train_losses
    assert first_history.val_losses == second_history.val_losses
    assert first.params == second.params


@pytest.mark.parametrize("kind", ["gcn", "fcn"])
def test_single_frame_loss_decreases(mesh, train_frames, kind):
    model_config = SMALL_GCN if kind == "gcn" else SMALL_FCN
    grid_spec = GridSpec.covering(mesh, cells=8) if kind == "fcn" else None
    block = train_frames.subset([15.0])
    single = FrameSet(mesh, block.rates, 1, block.fields[:, :1], block.provenance)
    norm = fit_normalization(train_frames)
    _, history = train(
        mesh, single, single.subset([]), TrainConfig(epochs=50, kind=kind), model_config, grid_spec=grid_spec, norm=norm
    )
    assert history.train_losses[-1] < history.train_losses[0]


def test_artifact_contents(mesh, train_frames, val_frames):
    artifact, history = train(mesh, train_frames, val_frames, TrainConfig(epochs=2), SMALL_GCN)
    assert artifact.kind == "gcn"
    assert artifact.meta["train_rates"] == [5.0, 15.0, 25.0]
    assert artifact.meta["best_epoch"] == history.best_epoch
    assert artifact.meta["graph"] == {"self_loops": True, "kernel": "inverse-exp", "distance_units": "km"}
    assert set(artifact.norm) == {"input_mean", "input_std", "output_mean", "output_std"}


def test_fcn_artifact_records_grid(mesh, train_frames, val_frames):
    spec = GridSpec.covering(mesh, cells=8)
    artifact, _ = train(mesh, train_frames, val_frames, TrainConfig(epochs=1, kind="fcn"), SMALL_FCN, grid_spec=spec)
    assert artifact.kind == "fcn"
    assert GridSpec.from_meta(artifact.meta["grid"]) == spec


def test_non_finite_loss_aborts(mesh, train_frames, val_frames, mocker):
    mocker.patch.object(GcnModel, "loss_and_grad", return_value=(float("nan"), []))
    with pytest.raises(DivergenceError) as excinfo:
        train(mesh, train_frames, val_frames, TrainConfig(epochs=5), SMALL_GCN)
    assert excinfo.value.epoch == 1


def test_early_stop(mesh, train_frames, val_frames):
    config = TrainConfig(epochs=20, learning_rate=0.0, early_stop=True, patience=2)
    io_interface = TestIOInterface()
    _, history = train(mesh, train_frames, val_frames, config, SMALL_GCN, io_interface=io_interface)
    assert len(history.records) == 3
    assert history.best_epoch == 1
    assert io_interface.contains("early stop at epoch 3")


def test_epoch_progress_lines(mesh, train_frames, val_frames):
    io_interface = TestIOInterface()
    train(mesh, train_frames, val_frames, TrainConfig(epochs=2), SMALL_GCN, io_interface=io_interface)
    assert io_interface.sent_messages[0].startswith("epoch 1/2 train_loss=")
    assert "val_loss=" in io_interface.sent_messages[1]


def test_best_validation_parameters_kept(mesh, train_frames, val_frames):
    artifact, history = train(mesh, train_frames, val_frames, TrainConfig(epochs=4, seed=1), SMALL_GCN)
    replay, _ = train(
        mesh, train_frames, val_frames, TrainConfig(epochs=history.best_epoch, seed=1), SMALL_GCN
    )
    assert np.array_equal(artifact.params.arrays()[0], replay.params.arrays()[0])
