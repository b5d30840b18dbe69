from dataclasses import dataclass
from typing import Iterator, List, Optional

import numpy as np

from iceemu.common.errors import ShapeError


@dataclass
class LayerParams:
    """
    Trainable parameters of one layer.

    weight is (F_out, F_in) for dense and graph layers and
    (C_out, C_in, k, k) for convolutions; bias, when present, has F_out entries.
    """

    weight: np.ndarray
    bias: Optional[np.ndarray] = None

    def __post_init__(self):
        self.weight = np.ascontiguousarray(self.weight, dtype=np.float64)
        if self.bias is not None:
            self.bias = np.ascontiguousarray(self.bias, dtype=np.float64)
            if self.bias.shape != (self.weight.shape[0],):
                raise ShapeError(f"bias shape {self.bias.shape} does not match weight shape {self.weight.shape}")

    def arrays(self) -> List[np.ndarray]:
        return [self.weight] if self.bias is None else [self.weight, self.bias]


class ModelParams:
    """Ordered layer parameters of a model."""

    def __init__(self, layers: List[LayerParams]):
        self.layers = list(layers)

    def arrays(self) -> List[np.ndarray]:
        """Live references to every parameter array, in layer order (weight before bias)."""
        return [array for layer in self.layers for array in layer.arrays()]

    def copy(self) -> "ModelParams":
        layers = []
        for layer in self.layers:
            layers.append(LayerParams(layer.weight.copy(), None if layer.bias is None else layer.bias.copy()))
        return ModelParams(layers)

    def assign(self, other: "ModelParams"):
        """Overwrite these arrays in place with another set of the same shapes."""
        for mine, theirs in zip(self.arrays(), other.arrays(), strict=True):
            mine[...] = theirs

    def names(self) -> List[str]:
        names = []
        for index, layer in enumerate(self.layers):
            names.append(f"layer{index}.weight")
            if layer.bias is not None:
                names.append(f"layer{index}.bias")
        return names

    def __len__(self) -> int:
        return len(self.layers)

    def __iter__(self) -> Iterator[LayerParams]:
        return iter(self.layers)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModelParams) or len(self.arrays()) != len(other.arrays()):
            return False
        return all(np.array_equal(a, b) for a, b in zip(self.arrays(), other.arrays()))

    def __repr__(self) -> str:
        shapes = ", ".join(str(layer.weight.shape) for layer in self.layers)
        return f"ModelParams({shapes})"
