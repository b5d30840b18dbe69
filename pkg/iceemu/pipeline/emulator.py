"""
This module contains the Emulator abstract base class and its implementations.

An emulator maps a (melting rate, month) pair to per-node fields (vx, vy, H)
in physical units on the native mesh. Evaluation, benchmarking and the
sensitivity sweep only talk to this interface.
"""

from abc import ABC, abstractmethod
from typing import Optional, Tuple

import numpy as np

from iceemu.common.errors import ArtifactError
from iceemu.mesh.graph import GraphOptions
from iceemu.mesh.mesh import Mesh
from iceemu.models.fcn import FcnConfig, FcnModel
from iceemu.models.gcn import GcnConfig, GcnModel
from iceemu.models.grid import GridSpec, MeshRaster
from iceemu.nn.artifact import ModelArtifact
from iceemu.oracle.frames import FrameSet, frame_inputs
from iceemu.pipeline.normalization import NormStats

Sample = Tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]


class Emulator(ABC):
    """
    Abstract base class for a field predictor.

    Methods
    -------
    @abstractmethod
    def predict(self, rate: float, month: int) -> np.ndarray:
        Per-node (vx, vy, H) in physical units, shape (N, 3).
    """

    kind = ""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh

    @abstractmethod
    def predict(self, rate: float, month: int) -> np.ndarray:
        pass

    def predict_series(self, rate: float, months: int) -> np.ndarray:
        """Predictions for months 0..months-1 of one rate, shape (T, N, 3)."""
        return np.stack([self.predict(rate, month) for month in range(months)])

    def predict_frames(self, frames: FrameSet) -> np.ndarray:
        """Predictions aligned with frames.fields, shape (R, T, N, 3)."""
        return np.stack([self.predict_series(float(rate), frames.months) for rate in frames.rates])


class GcnEmulator(Emulator):
    """Graph network running directly on the mesh nodes."""

    kind = "gcn"

    def __init__(self, model: GcnModel, norm: NormStats, graph_options: GraphOptions):
        super().__init__(model.graph.mesh)
        self.model = model
        self.norm = norm
        self.graph_options = graph_options

    def sample(self, frames: FrameSet, rate_index: int, month: int) -> Sample:
        """Normalized (inputs, targets, mask) for one training frame."""
        inputs = self.norm.normalize_inputs(frames.inputs(rate_index, month))
        return inputs, self.norm.normalize_targets(frames.fields[rate_index, month]), None

    def predict(self, rate: float, month: int) -> np.ndarray:
        inputs = self.norm.normalize_inputs(frame_inputs(self.mesh, rate, month))
        return self.norm.denormalize_targets(self.model.forward(inputs))

    def meta(self) -> dict:
        return {"graph": self.graph_options.to_meta(), "model": vars_of(self.model.config)}


class FcnEmulator(Emulator):
    """Convolutional network on a raster, with mesh/raster resampling on either side."""

    kind = "fcn"

    def __init__(self, model: FcnModel, norm: NormStats, raster: MeshRaster):
        super().__init__(raster.mesh)
        self.model = model
        self.norm = norm
        self.raster = raster

    def input_raster(self, rate: float, month: int) -> np.ndarray:
        """Normalized per-node inputs (x, y, t, m) rasterized onto the grid, shape (4, ny, nx)."""
        inputs = self.norm.normalize_inputs(frame_inputs(self.mesh, rate, month))
        return self.raster.rasterize(inputs).data

    def infer(self, inputs: np.ndarray) -> np.ndarray:
        return self.model.forward(inputs)

    def resample(self, outputs: np.ndarray) -> np.ndarray:
        """Normalized output raster to physical per-node fields."""
        return self.norm.denormalize_targets(self.raster.to_mesh(outputs))

    def sample(self, frames: FrameSet, rate_index: int, month: int) -> Sample:
        rate = float(frames.rates[rate_index])
        targets = self.raster.rasterize(self.norm.normalize_targets(frames.fields[rate_index, month])).data
        return self.input_raster(rate, month), targets, self.raster.mask

    def predict(self, rate: float, month: int) -> np.ndarray:
        return self.resample(self.infer(self.input_raster(rate, month)))

    def meta(self) -> dict:
        return {"grid": self.raster.spec.to_meta(), "model": vars_of(self.model.config)}


class TargetEmulator(Emulator):
    """Returns the stored frames themselves; an identity stub for checking the evaluation path."""

    kind = "target"

    def __init__(self, frames: FrameSet):
        super().__init__(frames.mesh)
        self.frames = frames

    def predict(self, rate: float, month: int) -> np.ndarray:
        return np.array(self.frames.fields[self.frames.rate_index(rate), month])


def vars_of(config) -> dict:
    return dict(vars(config))


def build_emulator(kind: str, mesh: Mesh, norm: NormStats, model_config, params=None, graph_options=None, spec=None):
    """Assemble an emulator from its parts; params default to a fresh initialization."""
    if kind == "gcn":
        graph_options = graph_options or GraphOptions()
        model = GcnModel(model_config, graph_options.build(mesh), params)
        return GcnEmulator(model, norm, graph_options)
    if kind == "fcn":
        spec = spec or GridSpec.covering(mesh)
        return FcnEmulator(FcnModel(model_config, params), norm, MeshRaster(mesh, spec))
    raise ArtifactError(f"unknown model kind {kind!r}")


def load_emulator(artifact: ModelArtifact, mesh: Mesh) -> Emulator:
    """
    Rebuild a trained emulator on a mesh.

    :raises ArtifactError: If the metadata is incomplete
    """
    norm = NormStats.from_arrays(artifact.norm)
    meta = artifact.meta
    try:
        if artifact.kind == "gcn":
            return build_emulator(
                "gcn", mesh, norm, GcnConfig(**meta["model"]), artifact.params, GraphOptions.from_meta(meta["graph"])
            )
        return build_emulator(
            "fcn", mesh, norm, FcnConfig(**meta["model"]), artifact.params, spec=GridSpec.from_meta(meta["grid"])
        )
    except (KeyError, TypeError) as exc:
        raise ArtifactError(f"artifact metadata is incomplete: {exc}") from exc
