"""
This module builds the weighted node graph a graph-convolution layer aggregates over.

The graph has one node per mesh node and one undirected edge per element edge,
optionally with a self-loop on every node. Adjacency is stored in compressed
sparse row form with the edge weight and the symmetric normalizer aligned to
each stored entry.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Union

import numpy as np
from scipy import sparse

from iceemu.common.errors import ConfigError, DegenerateEdgeError, MeshError
from iceemu.mesh.mesh import Mesh

DISTANCE_SCALES = {"km": 1.0, "m": 1000.0}
KERNEL_ALIASES = {"paper": "inverse-exp"}


class Kernel(Enum):
    """Edge-weight kernels as functions of the edge length d."""

    INVERSE_EXP = "inverse-exp"  # exp(-1/d)
    EXP_DECAY = "exp-decay"  # exp(-d)

    @classmethod
    def _missing_(cls, value):
        if value in KERNEL_ALIASES:
            return cls(KERNEL_ALIASES[value])
        return None


def edge_weight(distance, kernel: Union[Kernel, str] = Kernel.INVERSE_EXP):
    """
    Weight of an edge of the given length.

    :param distance: Edge length (scalar or array) in the graph's distance units
    :param kernel: Weight kernel
    :return: The weight(s), each in (0, 1)
    :raises DegenerateEdgeError: If any distance is not strictly positive
    """
    kernel = Kernel(kernel)
    d = np.asarray(distance, dtype=np.float64)
    if np.any(~(d > 0)):
        raise DegenerateEdgeError(f"edge length must be positive, got {d[~(d > 0)].ravel()[0]}")
    if kernel is Kernel.INVERSE_EXP:
        weight = np.exp(-1.0 / d)
    else:
        weight = np.exp(-d)
    return float(weight) if weight.ndim == 0 else weight


class MeshGraph:
    """
    Normalized adjacency of a mesh.

    Attributes
    ----------
    indptr, indices : np.ndarray
        CSR structure; column indices are sorted within each row.
    edge_weight : np.ndarray
        e_ij per stored entry; self-loops weigh exactly 1.
    normalizer : np.ndarray
        sqrt(d_i) * sqrt(d_j) per stored entry, where d counts neighbors plus self.
    degree : np.ndarray
        Per-node degree.
    """

    def __init__(self, mesh: Mesh, self_loops: bool, kernel: Kernel, distance_units: str):
        self.mesh = mesh
        self.self_loops = self_loops
        self.kernel = kernel
        self.distance_units = distance_units

        n = mesh.num_nodes
        edges = mesh.edges
        rows = np.concatenate([edges[:, 0], edges[:, 1]])
        cols = np.concatenate([edges[:, 1], edges[:, 0]])
        if self_loops:
            rows = np.concatenate([rows, np.arange(n)])
            cols = np.concatenate([cols, np.arange(n)])
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]

        loop = rows == cols
        delta = mesh.node_coords[cols] - mesh.node_coords[rows]
        distance = np.hypot(delta[:, 0], delta[:, 1]) * DISTANCE_SCALES[distance_units]
        degenerate = ~loop & ~(distance > 0)
        if degenerate.any():
            k = int(np.flatnonzero(degenerate)[0])
            raise DegenerateEdgeError(f"nodes {rows[k]} and {cols[k]} coincide; edge weight is undefined")
        weight = np.ones_like(distance)
        weight[~loop] = edge_weight(distance[~loop], kernel)

        degree = np.bincount(rows, minlength=n)
        if degree.min() == 0:
            raise MeshError(f"node {int(np.argmin(degree))} is not connected to any element")

        self.indices = cols
        self.indptr = np.concatenate([[0], np.cumsum(degree)])
        self.degree = degree
        self.edge_weight = weight
        self.normalizer = np.sqrt(degree[rows].astype(np.float64)) * np.sqrt(degree[cols].astype(np.float64))
        for array in (self.indices, self.indptr, self.degree, self.edge_weight, self.normalizer):
            array.setflags(write=False)
        self.aggregation = sparse.csr_matrix((weight / self.normalizer, cols, self.indptr), shape=(n, n))

    @property
    def num_nodes(self) -> int:
        return self.mesh.num_nodes

    def neighbors(self, node: int) -> np.ndarray:
        """Sorted neighbors of a node, including itself when self-loops are on."""
        return self.indices[self.indptr[node] : self.indptr[node + 1]]

    def aggregate(self, values: np.ndarray) -> np.ndarray:
        """Apply the normalized adjacency to per-node values, shape (N, F)."""
        return self.aggregation @ values

    def dense_operator(self) -> np.ndarray:
        """Dense copy of the normalized adjacency, for small graphs only."""
        return self.aggregation.toarray()

    def __repr__(self) -> str:
        return (
            f"MeshGraph(nodes={self.num_nodes}, entries={len(self.indices)}, "
            f"self_loops={self.self_loops}, kernel={self.kernel.value}, units={self.distance_units})"
        )


@dataclass(frozen=True)
class GraphOptions:
    """How a mesh is turned into a graph; stored with trained models."""

    self_loops: bool = True
    kernel: str = Kernel.INVERSE_EXP.value
    distance_units: str = "km"

    def build(self, mesh: Mesh) -> "MeshGraph":
        return build_graph(mesh, self.self_loops, self.kernel, self.distance_units)

    def to_meta(self) -> Dict:
        return {"self_loops": self.self_loops, "kernel": self.kernel, "distance_units": self.distance_units}

    @classmethod
    def from_meta(cls, meta: Dict) -> "GraphOptions":
        return cls(bool(meta["self_loops"]), str(meta["kernel"]), str(meta["distance_units"]))


def build_graph(
    mesh: Mesh,
    self_loops: bool = True,
    kernel: Union[Kernel, str] = Kernel.INVERSE_EXP,
    distance_units: str = "km",
) -> MeshGraph:
    """
    Build the normalized graph of a mesh.

    :param mesh: The mesh
    :param self_loops: Add a self-loop of weight 1 on every node
    :param kernel: Edge-weight kernel
    :param distance_units: Unit the kernel sees edge lengths in, "km" or "m"
    :return: The graph
    :raises ConfigError: On an unknown kernel or distance unit
    :raises DegenerateEdgeError: If two connected nodes coincide
    """
    try:
        kernel = Kernel(kernel)
    except ValueError as exc:
        raise ConfigError(f"unknown kernel {kernel!r}") from exc
    if distance_units not in DISTANCE_SCALES:
        raise ConfigError(f"unknown distance unit {distance_units!r}; expected one of {sorted(DISTANCE_SCALES)}")
    return MeshGraph(mesh, self_loops, kernel, distance_units)
