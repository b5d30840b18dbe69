"""
Median-dual control volumes.

Each node owns one third of every element it belongs to. The control-volume
faces are the segments joining element centroids to edge midpoints; their
integrated normals are summed per mesh edge and per boundary half-edge.
"""

import numpy as np


class MedianDual:
    """
    Median-dual geometry of a mesh.

    Attributes
    ----------
    areas : np.ndarray
        Control-volume area per node in km^2, shape (N,).
    edge_nodes : np.ndarray
        Undirected edges (a, b) with a < b, shape (M, 2).
    edge_normals : np.ndarray
        Integrated face normal per edge in km, pointing from a to b, shape (M, 2).
    boundary_nodes : np.ndarray
        Owning node of each boundary half-edge, shape (B,).
    boundary_normals : np.ndarray
        Integrated outward normal of each boundary half-edge in km, shape (B, 2).
    """

    def __init__(self, mesh):
        coords = mesh.node_coords
        elements = mesh.elements
        areas = mesh.signed_areas

        self.areas = np.bincount(elements.ravel(), weights=np.repeat(areas / 3.0, 3), minlength=mesh.num_nodes)

        centroid = coords[elements].mean(axis=1)
        local = ((0, 1), (1, 2), (2, 0))
        heads = np.concatenate([elements[:, a] for a, _ in local])
        tails = np.concatenate([elements[:, b] for _, b in local])
        midpoint = 0.5 * (coords[heads] + coords[tails])
        face = np.tile(centroid, (3, 1)) - midpoint
        normal = np.column_stack([face[:, 1], -face[:, 0]])
        along = coords[tails] - coords[heads]
        flip = np.einsum("ij,ij->i", normal, along) < 0
        normal[flip] *= -1.0

        # Stored orientation is from the lower to the higher node index.
        sign = np.where(heads < tails, 1.0, -1.0)
        undirected = np.sort(np.column_stack([heads, tails]), axis=1)
        self.edge_nodes, inverse = np.unique(undirected, axis=0, return_inverse=True)
        inverse = inverse.ravel()
        self.edge_normals = np.column_stack(
            [np.bincount(inverse, weights=sign * normal[:, k], minlength=len(self.edge_nodes)) for k in range(2)]
        )

        boundary = mesh.boundary_edges
        delta = coords[boundary[:, 1]] - coords[boundary[:, 0]]
        outward = 0.5 * np.column_stack([delta[:, 1], -delta[:, 0]])
        self.boundary_nodes = np.concatenate([boundary[:, 0], boundary[:, 1]])
        self.boundary_normals = np.concatenate([outward, outward])

        self.min_edge_length = mesh.min_edge_length

    def net_outward_normals(self) -> np.ndarray:
        """Sum of outward face normals around each control volume; zero for closed volumes."""
        n = len(self.areas)
        total = np.zeros((n, 2))
        for k in range(2):
            total[:, k] += np.bincount(self.edge_nodes[:, 0], weights=self.edge_normals[:, k], minlength=n)
            total[:, k] -= np.bincount(self.edge_nodes[:, 1], weights=self.edge_normals[:, k], minlength=n)
            total[:, k] += np.bincount(self.boundary_nodes, weights=self.boundary_normals[:, k], minlength=n)
        return total
