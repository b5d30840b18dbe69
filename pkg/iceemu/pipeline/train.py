"""
This module contains the training loop shared by the graph and convolutional emulators.

One epoch deals every training frame once in a seeded random order and takes
one Adam step per frame. The parameters with the lowest validation loss are
kept and written into the returned artifact.
"""

import dataclasses
import math
import time
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from iceemu.common.errors import ConfigError, DivergenceError
from iceemu.common.io_interface import DummyIOInterface, IOInterface
from iceemu.common.util import fsum_mean
from iceemu.mesh.graph import GraphOptions
from iceemu.mesh.mesh import Mesh
from iceemu.models.fcn import FcnConfig
from iceemu.models.gcn import GcnConfig
from iceemu.models.grid import GridSpec
from iceemu.nn.adam import AdamState, adam_step
from iceemu.nn.artifact import ModelArtifact
from iceemu.oracle.frames import FrameSet
from iceemu.pipeline.emulator import build_emulator
from iceemu.pipeline.normalization import NormStats, fit_normalization
from iceemu.pipeline.sampler import FrameShoe
from iceemu.pipeline.split import audit_split
from iceemu.pipeline.stats import TrainingHistory


class ModelKind(Enum):
    GCN = "gcn"
    FCN = "fcn"


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    learning_rate: float = 0.01
    seed: int = 0
    kind: str = ModelKind.GCN.value
    early_stop: bool = False
    patience: int = 20

    def __post_init__(self):
        try:
            ModelKind(self.kind)
        except ValueError as exc:
            raise ConfigError(f"unknown model kind {self.kind!r}; expected 'gcn' or 'fcn'") from exc
        if self.epochs < 1:
            raise ConfigError(f"epochs must be at least 1, got {self.epochs}")
        if not self.learning_rate >= 0:
            raise ConfigError(f"learning rate must be non-negative, got {self.learning_rate}")
        if self.patience < 1:
            raise ConfigError(f"patience must be at least 1, got {self.patience}")

    def to_meta(self):
        return dataclasses.asdict(self)


def derive_seeds(seed: int) -> Tuple[int, int]:
    """Independent (initialization, shuffling) seeds from one run seed."""
    init_seed, shuffle_seed = np.random.SeedSequence(seed).generate_state(2)
    return int(init_seed), int(shuffle_seed)


def frame_loss(emulator, frames: FrameSet) -> Optional[float]:
    """Mean normalized loss over every frame of a set, or None for an empty set."""
    if len(frames) == 0:
        return None
    losses = []
    for rate_index, month in frames.index_pairs():
        inputs, targets, mask = emulator.sample(frames, rate_index, month)
        losses.append(emulator.model.loss(inputs, targets, mask))
    return fsum_mean(losses)


def train(
    mesh: Mesh,
    train_frames: FrameSet,
    val_frames: FrameSet,
    config: TrainConfig,
    model_config=None,
    graph_options: Optional[GraphOptions] = None,
    grid_spec: Optional[GridSpec] = None,
    norm: Optional[NormStats] = None,
    io_interface: Optional[IOInterface] = None,
) -> Tuple[ModelArtifact, TrainingHistory]:
    """
    Train an emulator on the training frames.

    :param mesh: Mesh every frame set lives on
    :param train_frames: Frames the optimizer sees
    :param val_frames: Frames used for checkpoint selection; may be empty
    :param config: Epochs, learning rate, seed and model kind
    :param model_config: GcnConfig or FcnConfig; defaults for the kind when omitted
    :param graph_options: How the mesh becomes a graph (GCN only)
    :param grid_spec: Raster the FCN runs on; covers the mesh with 64 cells when omitted
    :param norm: Normalization statistics; fitted on train_frames when omitted
    :param io_interface: Receives one progress line per epoch
    :return: (artifact holding the best parameters, per-epoch history)
    :raises DivergenceError: If a loss becomes non-finite
    """
    io_interface = io_interface or DummyIOInterface()
    audit_split(train_frames, val_frames, train_frames.subset([]))
    kind = ModelKind(config.kind)
    init_seed, shuffle_seed = derive_seeds(config.seed)
    if model_config is None:
        model_config = GcnConfig() if kind is ModelKind.GCN else FcnConfig()
    model_config = dataclasses.replace(model_config, seed=init_seed)
    norm = norm or fit_normalization(train_frames)

    emulator = build_emulator(kind.value, mesh, norm, model_config, graph_options=graph_options, spec=grid_spec)
    params = emulator.model.params
    arrays = params.arrays()
    optimizer = AdamState(learning_rate=config.learning_rate)
    shoe = FrameShoe(train_frames.index_pairs(), seed=shuffle_seed)
    history = TrainingHistory()
    best = params.copy()

    for epoch in range(1, config.epochs + 1):
        started = time.perf_counter()
        losses = []
        for rate_index, month in shoe.deal_epoch():
            inputs, targets, mask = emulator.sample(train_frames, rate_index, month)
            loss, grads = emulator.model.loss_and_grad(inputs, targets, mask)
            if not math.isfinite(loss):
                raise DivergenceError(epoch, loss)
            adam_step(arrays, grads, optimizer)
            losses.append(loss)
        train_loss = fsum_mean(losses)
        val_loss = frame_loss(emulator, val_frames)
        if val_loss is not None and not math.isfinite(val_loss):
            raise DivergenceError(epoch, val_loss)
        improved = history.update(epoch, train_loss, val_loss, time.perf_counter() - started)
        if improved or val_loss is None:
            best = params.copy()
        io_interface.output(
            f"epoch {epoch}/{config.epochs} train_loss={train_loss:.6e}"
            + ("" if val_loss is None else f" val_loss={val_loss:.6e}")
        )
        if config.early_stop and history.best_epoch is not None and epoch - history.best_epoch >= config.patience:
            io_interface.output(f"early stop at epoch {epoch}; best epoch {history.best_epoch}")
            break

    meta = emulator.meta()
    meta["train"] = config.to_meta()
    meta["train_rates"] = [float(rate) for rate in train_frames.rates]
    meta["best_epoch"] = history.best_epoch if history.best_epoch is not None else len(history.records)
    return ModelArtifact(kind.value, meta, best, norm.to_arrays()), history
