"""
This module contains the EmulatorModel abstract base class shared by the
graph and convolutional networks.
"""

from abc import ABC, abstractmethod
from typing import List, Optional, Tuple

import numpy as np

from iceemu.nn.core import masked_mse, mse
from iceemu.nn.params import ModelParams


class EmulatorModel(ABC):
    """
    Abstract base class for a trainable emulator network.

    Methods
    -------
    @abstractmethod
    def forward(self, inputs) -> np.ndarray:
        Run the network, caching what backward needs.

    @abstractmethod
    def backward(self, upstream) -> List[np.ndarray]:
        Gradients of every parameter array given d(loss)/d(output).
    """

    kind: str = ""

    def __init__(self, params: ModelParams):
        self.params = params

    @abstractmethod
    def forward(self, inputs: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def backward(self, upstream: np.ndarray) -> List[np.ndarray]:
        pass

    def loss(self, inputs: np.ndarray, targets: np.ndarray, mask: Optional[np.ndarray] = None) -> float:
        output = self.forward(inputs)
        if mask is None:
            return mse(output, targets)[0]
        return masked_mse(output, targets, mask)[0]

    def loss_and_grad(
        self, inputs: np.ndarray, targets: np.ndarray, mask: Optional[np.ndarray] = None
    ) -> Tuple[float, List[np.ndarray]]:
        """MSE loss (restricted to mask when given) and gradients aligned with params.arrays()."""
        output = self.forward(inputs)
        if mask is None:
            loss, upstream = mse(output, targets)
        else:
            loss, upstream = masked_mse(output, targets, mask)
        return loss, self.backward(upstream)


def glorot_uniform(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    """Uniform draw on +-sqrt(6 / (fan_in + fan_out))."""
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)
