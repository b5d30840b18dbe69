"""
This module implements the graph convolutional emulator.

A graph-convolution layer computes, for every node i,

    out_i = act( sum_{j in N(i)} (e_ij / c_ij) * W h_j )

which is the sparse product A_hat (H W^T). The network stacks these layers
with leaky-ReLU activations and finishes with a node-wise affine head.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from iceemu.common.errors import ConfigError, ShapeError
from iceemu.mesh.graph import MeshGraph
from iceemu.models.base import EmulatorModel, glorot_uniform
from iceemu.nn.core import DEFAULT_SLOPE, leaky_relu, leaky_relu_grad
from iceemu.nn.params import LayerParams, ModelParams


@dataclass(frozen=True)
class GcnConfig:
    input_features: int = 4
    output_features: int = 3
    hidden_width: int = 128
    num_graph_layers: int = 5
    leaky_slope: float = DEFAULT_SLOPE
    seed: int = 0

    def __post_init__(self):
        for name in ("input_features", "output_features", "hidden_width", "num_graph_layers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1, got {getattr(self, name)}")

    def layer_widths(self) -> List[int]:
        return [self.input_features] + [self.hidden_width] * self.num_graph_layers


@dataclass
class GraphConvCache:
    h_in: np.ndarray
    pre_activation: np.ndarray
    weight: np.ndarray
    activation: bool
    slope: float


def gcn_layer_forward(
    graph: MeshGraph,
    h_in: np.ndarray,
    layer: LayerParams,
    activation: bool = True,
    slope: float = DEFAULT_SLOPE,
) -> Tuple[np.ndarray, GraphConvCache]:
    """
    One graph-convolution layer.

    :param graph: Graph to aggregate over
    :param h_in: Node features, shape (N, F_in)
    :param layer: Weight of shape (F_out, F_in); graph layers carry no bias
    :param activation: Apply leaky-ReLU to the aggregate
    :param slope: Leaky-ReLU negative slope
    :return: (node features of shape (N, F_out), cache for the backward pass)
    :raises ShapeError: If the shapes do not line up
    """
    h_in = np.asarray(h_in, dtype=np.float64)
    weight = layer.weight
    if h_in.ndim != 2 or h_in.shape[0] != graph.num_nodes:
        raise ShapeError(f"expected features with {graph.num_nodes} rows, got shape {h_in.shape}")
    if weight.ndim != 2 or weight.shape[1] != h_in.shape[1]:
        raise ShapeError(f"weight shape {weight.shape} does not accept {h_in.shape[1]} input features")
    pre = graph.aggregate(h_in @ weight.T)
    out = leaky_relu(pre, slope) if activation else pre
    return out, GraphConvCache(h_in, pre, weight, activation, slope)


def gcn_layer_backward(graph: MeshGraph, cache: GraphConvCache, upstream: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Reverse pass of `gcn_layer_forward`.

    :return: (gradient with respect to h_in, gradient with respect to the weight)
    """
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != cache.pre_activation.shape:
        raise ShapeError(f"upstream shape {upstream.shape} differs from output shape {cache.pre_activation.shape}")
    d_pre = upstream * leaky_relu_grad(cache.pre_activation, cache.slope) if cache.activation else upstream
    d_transformed = graph.aggregation.T @ d_pre
    return d_transformed @ cache.weight, d_transformed.T @ cache.h_in


def init_params(config: GcnConfig, seed: Optional[int] = None) -> ModelParams:
    """Glorot-uniform weights for every graph layer and the head; zero head bias."""
    rng = np.random.default_rng(config.seed if seed is None else seed)
    widths = config.layer_widths()
    layers = [
        LayerParams(glorot_uniform(rng, (f_out, f_in), f_in, f_out)) for f_in, f_out in zip(widths[:-1], widths[1:])
    ]
    head_in, head_out = widths[-1], config.output_features
    layers.append(LayerParams(glorot_uniform(rng, (head_out, head_in), head_in, head_out), np.zeros(head_out)))
    return ModelParams(layers)


class GcnModel(EmulatorModel):
    """
    Stacked graph convolutions with a node-wise affine output head.

    :param config: Architecture
    :param graph: Graph of the mesh the model runs on; any mesh size works
    :param params: Parameters; initialized from config.seed when omitted
    """

    kind = "gcn"

    def __init__(self, config: GcnConfig, graph: MeshGraph, params: Optional[ModelParams] = None):
        params = params if params is not None else init_params(config)
        expected = len(config.layer_widths())
        if len(params) != expected:
            raise ShapeError(f"expected {expected} layers, got {len(params)}")
        super().__init__(params)
        self.config = config
        self.graph = graph
        self._caches: List[GraphConvCache] = []
        self._head_input: Optional[np.ndarray] = None

    def forward(self, inputs: np.ndarray) -> np.ndarray:
        """Map node inputs (N, input_features) to node outputs (N, output_features)."""
        features = np.asarray(inputs, dtype=np.float64)
        self._caches = []
        for layer in self.params.layers[:-1]:
            features, cache = gcn_layer_forward(self.graph, features, layer, True, self.config.leaky_slope)
            self._caches.append(cache)
        head = self.params.layers[-1]
        self._head_input = features
        return features @ head.weight.T + head.bias

    def backward(self, upstream: np.ndarray) -> List[np.ndarray]:
        if self._head_input is None:
            raise RuntimeError("backward called before forward")
        head = self.params.layers[-1]
        grads = [upstream.T @ self._head_input, upstream.sum(axis=0)]
        d_features = upstream @ head.weight
        layer_grads = []
        for cache in reversed(self._caches):
            d_features, d_weight = gcn_layer_backward(self.graph, cache, d_features)
            layer_grads.append(d_weight)
        return layer_grads[::-1] + grads

    def __repr__(self) -> str:
        return f"GcnModel(widths={self.config.layer_widths()}, nodes={self.graph.num_nodes})"
