"""
Z-score normalization of model inputs (x, y, t, m) and targets (vx, vy, H),
fitted on training frames only.
"""

from dataclasses import dataclass
from typing import Dict

import numpy as np

from iceemu.common.errors import NormalizationError
from iceemu.oracle.frames import MONTHS_PER_YEAR, FrameSet

INPUT_NAMES = ("x", "y", "t", "m")
OUTPUT_NAMES = ("vx", "vy", "H")


def _check_spread(names, mean: np.ndarray, std: np.ndarray):
    for name, mu, sigma in zip(names, mean, std):
        if not np.isfinite(sigma) or sigma <= 1e-12 * max(1.0, abs(mu)):
            raise NormalizationError(f"feature {name!r} is constant over the training frames (std={sigma})")


@dataclass(frozen=True)
class NormStats:
    input_mean: np.ndarray
    input_std: np.ndarray
    output_mean: np.ndarray
    output_std: np.ndarray

    def __post_init__(self):
        for name in ("input_mean", "input_std", "output_mean", "output_std"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        _check_spread(INPUT_NAMES, self.input_mean, self.input_std)
        _check_spread(OUTPUT_NAMES, self.output_mean, self.output_std)

    def normalize_inputs(self, values: np.ndarray) -> np.ndarray:
        return (values - self.input_mean) / self.input_std

    def denormalize_inputs(self, values: np.ndarray) -> np.ndarray:
        return values * self.input_std + self.input_mean

    def normalize_targets(self, values: np.ndarray) -> np.ndarray:
        return (values - self.output_mean) / self.output_std

    def denormalize_targets(self, values: np.ndarray) -> np.ndarray:
        return values * self.output_std + self.output_mean

    def to_arrays(self) -> Dict[str, np.ndarray]:
        return {
            "input_mean": self.input_mean,
            "input_std": self.input_std,
            "output_mean": self.output_mean,
            "output_std": self.output_std,
        }

    @classmethod
    def from_arrays(cls, arrays: Dict[str, np.ndarray]) -> "NormStats":
        try:
            return cls(arrays["input_mean"], arrays["input_std"], arrays["output_mean"], arrays["output_std"])
        except KeyError as exc:
            raise NormalizationError(f"normalization statistics lack {exc.args[0]!r}") from exc


def fit_normalization(train: FrameSet) -> NormStats:
    """
    Per-feature mean and population standard deviation over every (frame, node) sample.

    Every frame shares the node coordinates, every rate shares the months and
    every month shares the rates, so each input statistic reduces to one axis.

    :raises NormalizationError: If the frame set is empty or any feature is constant
    """
    if len(train) == 0:
        raise NormalizationError("cannot fit normalization on an empty frame set")
    coords = train.mesh.node_coords
    times = np.arange(train.months) / MONTHS_PER_YEAR
    input_mean = np.array([coords[:, 0].mean(), coords[:, 1].mean(), times.mean(), train.rates.mean()])
    input_std = np.array([coords[:, 0].std(), coords[:, 1].std(), times.std(), train.rates.std()])
    samples = train.fields.reshape(-1, 3)
    return NormStats(input_mean, input_std, samples.mean(axis=0), samples.std(axis=0))
