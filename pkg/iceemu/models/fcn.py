"""
The fully convolutional baseline: a stack of same-padded convolutions on a
raster, leaky-ReLU after every layer but the last.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from iceemu.common.errors import ConfigError, ShapeError
from iceemu.models.base import EmulatorModel, glorot_uniform
from iceemu.models.conv import Conv2dCache, conv2d_backward, conv2d_forward
from iceemu.nn.core import DEFAULT_SLOPE, leaky_relu, leaky_relu_grad
from iceemu.nn.params import LayerParams, ModelParams


@dataclass(frozen=True)
class FcnConfig:
    input_channels: int = 4
    output_channels: int = 3
    hidden_width: int = 128
    num_conv_layers: int = 6
    kernel_size: int = 3
    leaky_slope: float = DEFAULT_SLOPE
    seed: int = 0

    def __post_init__(self):
        for name in ("input_channels", "output_channels", "hidden_width"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1, got {getattr(self, name)}")
        if self.num_conv_layers < 2:
            raise ConfigError(f"num_conv_layers must be at least 2, got {self.num_conv_layers}")
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ConfigError(f"kernel_size must be a positive odd number, got {self.kernel_size}")

    def channel_widths(self) -> List[int]:
        return [self.input_channels] + [self.hidden_width] * (self.num_conv_layers - 1) + [self.output_channels]


def init_params(config: FcnConfig, seed: Optional[int] = None) -> ModelParams:
    rng = np.random.default_rng(config.seed if seed is None else seed)
    widths = config.channel_widths()
    k = config.kernel_size
    return ModelParams(
        [
            LayerParams(glorot_uniform(rng, (c_out, c_in, k, k), c_in * k * k, c_out * k * k), np.zeros(c_out))
            for c_in, c_out in zip(widths[:-1], widths[1:])
        ]
    )


class FcnModel(EmulatorModel):
    """
    Convolutional network mapping an input raster (C_in, ny, nx) to an output raster (C_out, ny, nx).
    """

    kind = "fcn"

    def __init__(self, config: FcnConfig, params: Optional[ModelParams] = None):
        params = params if params is not None else init_params(config)
        if len(params) != config.num_conv_layers:
            raise ShapeError(f"expected {config.num_conv_layers} layers, got {len(params)}")
        super().__init__(params)
        self.config = config
        self._caches: List[Conv2dCache] = []
        self._pre: List[np.ndarray] = []

    def forward(self, inputs: np.ndarray) -> np.ndarray:
        features = np.asarray(inputs, dtype=np.float64)
        self._caches, self._pre = [], []
        last = len(self.params) - 1
        for index, layer in enumerate(self.params):
            pre, cache = conv2d_forward(features, layer.weight, layer.bias)
            self._caches.append(cache)
            self._pre.append(pre)
            features = pre if index == last else leaky_relu(pre, self.config.leaky_slope)
        return features

    def backward(self, upstream: np.ndarray) -> List[np.ndarray]:
        if not self._caches:
            raise RuntimeError("backward called before forward")
        grads: List[np.ndarray] = []
        d_features = np.asarray(upstream, dtype=np.float64)
        last = len(self.params) - 1
        for index in range(last, -1, -1):
            if index != last:
                d_features = d_features * leaky_relu_grad(self._pre[index], self.config.leaky_slope)
            d_features, d_kernel, d_bias = conv2d_backward(self._caches[index], d_features)
            grads[:0] = [d_kernel, d_bias]
        return grads

    def __repr__(self) -> str:
        return f"FcnModel(channels={self.config.channel_widths()}, kernel={self.config.kernel_size})"
