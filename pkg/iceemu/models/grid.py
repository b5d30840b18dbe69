"""
This module moves per-node values between a mesh and a regular raster.

Both directions are linear and are built once per (mesh, grid) pair as
sparse operators:

- rasterization: each cell whose center lies in the mesh hull takes the
  barycentric interpolation of its element's node values; cells outside copy
  the row of their nearest valid cell.
- resampling: each node takes the bilinear interpolation of the four
  surrounding cell centers when all four are valid, and its nearest valid
  cell otherwise.

Raster data is channel-first, shape (C, ny, nx), with row j along y.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Tuple

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from iceemu.common.errors import ConfigError, MeshError, ShapeError
from iceemu.mesh.mesh import Mesh, locate_points


@dataclass(frozen=True)
class GridSpec:
    nx: int
    ny: int
    origin: Tuple[float, float]
    spacing: float

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ConfigError(f"grid must have at least one cell per axis, got {self.nx} x {self.ny}")
        if not self.spacing > 0:
            raise ConfigError(f"grid spacing must be positive, got {self.spacing}")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @classmethod
    def covering(cls, mesh: Mesh, cells: int = 64) -> "GridSpec":
        """Square cells covering the mesh bounds with `cells` cells along the longer side."""
        if cells < 2:
            raise ConfigError(f"grid needs at least 2 cells along the longer side, got {cells}")
        xmin, ymin, xmax, ymax = mesh.bounds
        spacing = max(xmax - xmin, ymax - ymin) / cells
        nx = max(1, int(np.ceil((xmax - xmin) / spacing - 1e-9)))
        ny = max(1, int(np.ceil((ymax - ymin) / spacing - 1e-9)))
        return cls(nx, ny, (xmin, ymin), spacing)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.ny, self.nx

    def cell_centers(self) -> np.ndarray:
        """Centers of every cell in row-major (j, i) order, shape (ny * nx, 2)."""
        xs = self.origin[0] + (np.arange(self.nx) + 0.5) * self.spacing
        ys = self.origin[1] + (np.arange(self.ny) + 0.5) * self.spacing
        gx, gy = np.meshgrid(xs, ys)
        return np.column_stack([gx.ravel(), gy.ravel()])

    def to_meta(self) -> Dict:
        return {"nx": self.nx, "ny": self.ny, "origin": list(self.origin), "spacing": self.spacing}

    @classmethod
    def from_meta(cls, meta: Dict) -> "GridSpec":
        return cls(int(meta["nx"]), int(meta["ny"]), tuple(meta["origin"]), float(meta["spacing"]))


@dataclass(frozen=True)
class Grid:
    """Raster values with their spec and validity mask."""

    spec: GridSpec
    mask: np.ndarray
    data: np.ndarray

    def __post_init__(self):
        if self.mask.shape != self.spec.shape or self.data.shape[1:] != self.spec.shape:
            raise ShapeError(f"grid arrays do not match spec shape {self.spec.shape}")


class MeshRaster:
    """
    Cached rasterization and resampling operators for one (mesh, grid) pair.

    :raises MeshError: If no cell center falls inside the mesh
    """

    def __init__(self, mesh: Mesh, spec: GridSpec):
        self.mesh = mesh
        self.spec = spec
        centers = spec.cell_centers()
        elements, weights = locate_points(mesh, centers)
        valid = elements >= 0
        if not valid.any():
            raise MeshError("no grid cell center lies inside the mesh")
        self.mask = valid.reshape(spec.shape)
        self._valid_index = np.flatnonzero(valid)
        self._valid_tree = cKDTree(centers[valid])

        # Invalid cells borrow the element and weights of their nearest valid cell.
        source = np.arange(len(centers))
        if not valid.all():
            _, nearest = self._valid_tree.query(centers[~valid])
            source[~valid] = self._valid_index[nearest]
        rows = np.repeat(np.arange(len(centers)), 3)
        cols = mesh.elements[elements[source]].ravel()
        self.rasterizer = sparse.csr_matrix(
            (weights[source].ravel(), (rows, cols)), shape=(len(centers), mesh.num_nodes)
        )

    @cached_property
    def resampler(self) -> sparse.csr_matrix:
        spec = self.spec
        coords = self.mesh.node_coords
        fx = (coords[:, 0] - spec.origin[0]) / spec.spacing - 0.5
        fy = (coords[:, 1] - spec.origin[1]) / spec.spacing - 0.5
        i0 = np.floor(fx).astype(np.int64)
        j0 = np.floor(fy).astype(np.int64)
        tx, ty = fx - i0, fy - j0

        inside = (i0 >= 0) & (i0 + 1 < spec.nx) & (j0 >= 0) & (j0 + 1 < spec.ny)
        bilinear = inside.copy()
        ic, jc = np.clip(i0, 0, spec.nx - 2), np.clip(j0, 0, spec.ny - 2)
        corners = [(jc, ic), (jc, ic + 1), (jc + 1, ic), (jc + 1, ic + 1)]
        if spec.nx > 1 and spec.ny > 1:
            for j, i in corners:
                bilinear &= self.mask[j, i]
        else:
            bilinear[:] = False

        rows, cols, vals = [], [], []
        nodes = np.flatnonzero(bilinear)
        corner_weights = [(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty]
        for (j, i), w in zip(corners, corner_weights):
            rows.append(nodes)
            cols.append(j[nodes] * spec.nx + i[nodes])
            vals.append(w[nodes])

        fallback = np.flatnonzero(~bilinear)
        if len(fallback):
            _, nearest = self._valid_tree.query(coords[fallback])
            rows.append(fallback)
            cols.append(self._valid_index[nearest])
            vals.append(np.ones(len(fallback)))
        shape = (self.mesh.num_nodes, spec.nx * spec.ny)
        return sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=shape)

    def rasterize(self, node_values: np.ndarray) -> Grid:
        """Per-node values (N, C) to a channel-first raster (C, ny, nx)."""
        values = np.asarray(node_values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != self.mesh.num_nodes:
            raise ShapeError(f"expected values with {self.mesh.num_nodes} rows, got shape {values.shape}")
        data = (self.rasterizer @ values).T.reshape(values.shape[1], *self.spec.shape)
        return Grid(self.spec, self.mask, data)

    def to_mesh(self, data: np.ndarray) -> np.ndarray:
        """Channel-first raster (C, ny, nx) to per-node values (N, C)."""
        data = np.asarray(data, dtype=np.float64)
        if data.shape[1:] != self.spec.shape:
            raise ShapeError(f"raster shape {data.shape[1:]} differs from grid shape {self.spec.shape}")
        return self.resampler @ data.reshape(data.shape[0], -1).T


def rasterize(mesh: Mesh, node_values: np.ndarray, spec: GridSpec) -> Grid:
    return MeshRaster(mesh, spec).rasterize(node_values)


def grid_to_mesh(grid: Grid, mesh: Mesh) -> np.ndarray:
    return MeshRaster(mesh, grid.spec).to_mesh(grid.data)
