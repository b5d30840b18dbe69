"""
This module defines the `Mesh` class, an immutable planar triangular mesh, along
with the structured-grid generator, point location and the mesh file format.

Coordinates are kilometers on a planar projection. Elements are node-index
triples in counter-clockwise order.

Mesh file format::

    # mesh v1 units=km
    nodes
    0,0.0,0.0
    ...
    elements
    0,0,1,5
    ...
"""

import csv
import itertools
import math
import re
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree

from iceemu.common.errors import ConfigError, MeshError

DUPLICATE_TOLERANCE_KM = 1e-9
BARYCENTRIC_TOLERANCE = -1e-12
MESH_HEADER = re.compile(r"^# mesh v(\d+) units=(\w+)$")
UNIT_SCALE_TO_KM = {"km": 1.0, "m": 1e-3}


class Mesh:
    """
    An immutable triangular mesh.

    :param node_coords: Array of (x, y) node coordinates in kilometers, shape (N, 2)
    :param elements: Array of counter-clockwise node-index triples, shape (E, 3)
    :param validate: Check the mesh invariants (default True)
    :raises MeshError: If an invariant is violated
    """

    def __init__(self, node_coords, elements, validate: bool = True):
        coords = np.array(node_coords, dtype=np.float64)
        elems = np.array(elements, dtype=np.int64)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise MeshError(f"node_coords must have shape (N, 2), got {coords.shape}")
        if elems.ndim != 2 or elems.shape[1] != 3:
            raise MeshError(f"elements must have shape (E, 3), got {elems.shape}")
        coords.setflags(write=False)
        elems.setflags(write=False)
        self.node_coords = coords
        self.elements = elems
        if validate:
            self._validate()

    def _validate(self):
        n = self.num_nodes
        if n == 0 or self.num_elements == 0:
            raise MeshError("mesh must contain at least one element")
        if not np.all(np.isfinite(self.node_coords)):
            bad = int(np.flatnonzero(~np.isfinite(self.node_coords).all(axis=1))[0])
            raise MeshError(f"node {bad} has non-finite coordinates")
        if self.elements.min() < 0 or self.elements.max() >= n:
            bad = int(np.flatnonzero((self.elements < 0).any(1) | (self.elements >= n).any(1))[0])
            raise MeshError(f"element {bad} references a node outside 0..{n - 1}")

        areas = self.signed_areas
        extent = np.ptp(self.node_coords, axis=0).max()
        degenerate = areas <= 1e-12 * max(extent, 1.0) ** 2
        if degenerate.any():
            bad = int(np.flatnonzero(degenerate)[0])
            raise MeshError(f"element {bad} is degenerate or not counter-clockwise (area={areas[bad]})")

        _, counts = self._unique_edges
        if counts.max() > 2:
            raise MeshError("an edge is shared by more than two elements")

        pairs = cKDTree(self.node_coords).query_pairs(DUPLICATE_TOLERANCE_KM)
        if pairs:
            i, j = min(pairs)
            raise MeshError(f"nodes {i} and {j} coincide within {DUPLICATE_TOLERANCE_KM} km")

    @property
    def num_nodes(self) -> int:
        return self.node_coords.shape[0]

    @property
    def num_elements(self) -> int:
        return self.elements.shape[0]

    @cached_property
    def signed_areas(self) -> np.ndarray:
        """Signed element areas in km^2; positive for counter-clockwise elements."""
        p0, p1, p2 = (self.node_coords[self.elements[:, k]] for k in range(3))
        d1 = p1 - p0
        d2 = p2 - p0
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @cached_property
    def _unique_edges(self) -> Tuple[np.ndarray, np.ndarray]:
        directed = self.elements[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
        undirected = np.sort(directed, axis=1)
        return np.unique(undirected, axis=0, return_counts=True)

    @property
    def edges(self) -> np.ndarray:
        """Unique undirected edges as sorted (a, b) pairs with a < b, shape (M, 2)."""
        return self._unique_edges[0]

    @cached_property
    def boundary_edges(self) -> np.ndarray:
        """Directed boundary edges, oriented counter-clockwise around the domain."""
        directed = self.elements[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
        edges, counts = self._unique_edges
        single = {tuple(e) for e in edges[counts == 1]}
        keep = [k for k, (a, b) in enumerate(directed) if (min(a, b), max(a, b)) in single]
        return directed[keep]

    @cached_property
    def boundary_nodes(self) -> np.ndarray:
        """Sorted indices of nodes on the mesh boundary."""
        return np.unique(self.boundary_edges)

    @property
    def bounds(self) -> Tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) of the node coordinates."""
        xmin, ymin = self.node_coords.min(axis=0)
        xmax, ymax = self.node_coords.max(axis=0)
        return float(xmin), float(ymin), float(xmax), float(ymax)

    @cached_property
    def min_edge_length(self) -> float:
        a, b = self.edges[:, 0], self.edges[:, 1]
        return float(np.hypot(*(self.node_coords[b] - self.node_coords[a]).T).min())

    @cached_property
    def dual(self):
        """Median-dual control volumes of this mesh."""
        from iceemu.mesh.dual import MedianDual

        return MedianDual(self)

    @cached_property
    def _centroid_tree(self) -> Tuple[cKDTree, float]:
        corners = self.node_coords[self.elements]
        centroids = corners.mean(axis=1)
        reach = float(np.max(np.linalg.norm(corners - centroids[:, None, :], axis=2)))
        return cKDTree(centroids), reach

    @cached_property
    def _inverse_maps(self) -> Tuple[np.ndarray, np.ndarray]:
        p0 = self.node_coords[self.elements[:, 0]]
        p1 = self.node_coords[self.elements[:, 1]]
        p2 = self.node_coords[self.elements[:, 2]]
        jac = np.stack([p1 - p0, p2 - p0], axis=2)  # columns are edge vectors
        return p0, np.linalg.inv(jac)

    def __repr__(self) -> str:
        return f"Mesh(nodes={self.num_nodes}, elements={self.num_elements})"

    def __str__(self) -> str:
        return f"Mesh with {self.num_nodes} nodes and {self.num_elements} elements"


def triangulate_rectangle(
    spacing_km: float,
    width_km: float,
    height_km: float,
    jitter_fraction: float = 0.0,
    seed: int = 0,
) -> Mesh:
    """
    Build a structured triangulation of the rectangle [0, width] x [0, height].

    Each grid cell is split along its lower-left to upper-right diagonal.
    Interior nodes are displaced in a random direction by a distance drawn
    uniformly from [0, jitter_fraction * spacing]; boundary nodes stay put.

    :param spacing_km: Grid spacing; must divide both extents into >= 2 intervals
    :param width_km: Extent along x
    :param height_km: Extent along y
    :param jitter_fraction: Interior displacement bound as a fraction of spacing, in [0, 0.3)
    :param seed: Seed for the jitter
    :return: The mesh
    :raises ConfigError: If the geometry parameters are invalid
    """
    if not spacing_km > 0 or not width_km > 0 or not height_km > 0:
        raise ConfigError(
            f"spacing and extents must be positive (spacing={spacing_km}, width={width_km}, height={height_km})"
        )
    if not 0 <= jitter_fraction < 0.3:
        raise ConfigError(f"jitter_fraction must lie in [0, 0.3), got {jitter_fraction}")

    intervals = []
    for name, extent in (("width", width_km), ("height", height_km)):
        count = round(extent / spacing_km)
        if count < 2 or not math.isclose(count * spacing_km, extent, rel_tol=1e-9):
            raise ConfigError(f"spacing {spacing_km} must divide {name} {extent} into at least 2 intervals")
        intervals.append(count)
    nx, ny = intervals[0] + 1, intervals[1] + 1

    xs = np.linspace(0.0, width_km, nx)
    ys = np.linspace(0.0, height_km, ny)
    gx, gy = np.meshgrid(xs, ys)
    coords = np.column_stack([gx.ravel(), gy.ravel()])

    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny))
    interior = ((ii > 0) & (ii < nx - 1) & (jj > 0) & (jj < ny - 1)).ravel()
    rng = np.random.default_rng(seed)
    radius = jitter_fraction * spacing_km * rng.uniform(0.0, 1.0, interior.sum())
    angle = rng.uniform(0.0, 2.0 * np.pi, interior.sum())
    coords[interior, 0] += radius * np.cos(angle)
    coords[interior, 1] += radius * np.sin(angle)

    ci, cj = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1))
    n00 = (cj * nx + ci).ravel()
    n10 = n00 + 1
    n01 = n00 + nx
    n11 = n01 + 1
    lower = np.column_stack([n00, n10, n11])
    upper = np.column_stack([n00, n11, n01])
    elements = np.stack([lower, upper], axis=1).reshape(-1, 3)
    return Mesh(coords, elements)


def locate_points(mesh: Mesh, points) -> Tuple[np.ndarray, np.ndarray]:
    """
    Locate many points at once.

    Candidate elements come from a KD-tree over element centroids: a point can
    only lie in an element whose centroid is within the largest centroid-to-vertex
    distance of the mesh. Among the candidates that contain the point, the lowest
    element index wins.

    :param mesh: The mesh
    :param points: Query points, shape (M, 2)
    :return: (element index per point, -1 when outside the hull; barycentric weights, shape (M, 3))
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    found = np.full(len(pts), -1, dtype=np.int64)
    weights = np.zeros((len(pts), 3))
    if len(pts) == 0:
        return found, weights

    tree, reach = mesh._centroid_tree
    candidates = tree.query_ball_point(pts, reach * (1.0 + 1e-9) + 1e-12)
    counts = np.fromiter((len(c) for c in candidates), dtype=np.int64, count=len(pts))
    point_ids = np.repeat(np.arange(len(pts)), counts)
    element_ids = np.fromiter(itertools.chain.from_iterable(candidates), dtype=np.int64, count=int(counts.sum()))

    p0, inv = mesh._inverse_maps
    d = pts[point_ids] - p0[element_ids]
    maps = inv[element_ids]
    l1 = maps[:, 0, 0] * d[:, 0] + maps[:, 0, 1] * d[:, 1]
    l2 = maps[:, 1, 0] * d[:, 0] + maps[:, 1, 1] * d[:, 1]
    l0 = 1.0 - l1 - l2
    inside = (l0 >= BARYCENTRIC_TOLERANCE) & (l1 >= BARYCENTRIC_TOLERANCE) & (l2 >= BARYCENTRIC_TOLERANCE)

    hits = np.flatnonzero(inside)
    order = hits[np.lexsort((element_ids[hits], point_ids[hits]))]
    _, first = np.unique(point_ids[order], return_index=True)
    chosen = order[first]
    found[point_ids[chosen]] = element_ids[chosen]
    weights[point_ids[chosen]] = np.column_stack([l0[chosen], l1[chosen], l2[chosen]])
    return found, weights


def locate_point(mesh: Mesh, point) -> Optional[Tuple[int, np.ndarray]]:
    """
    Find the element containing a point.

    :param mesh: The mesh
    :param point: (x, y) in kilometers
    :return: (element index, barycentric weights) or None when outside the hull
    """
    found, weights = locate_points(mesh, [point])
    if found[0] < 0:
        return None
    return int(found[0]), weights[0]


def write_mesh(mesh: Mesh, path) -> None:
    """Write a mesh in the `# mesh v1` text format."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write("# mesh v1 units=km\n")
        writer = csv.writer(f, lineterminator="\n")
        f.write("nodes\n")
        writer.writerows((i, repr(float(x)), repr(float(y))) for i, (x, y) in enumerate(mesh.node_coords))
        f.write("elements\n")
        writer.writerows((i, int(a), int(b), int(c)) for i, (a, b, c) in enumerate(mesh.elements))


def read_mesh(path) -> Mesh:
    """
    Read a mesh written in the `# mesh v1` text format.

    Coordinates given in meters are converted to kilometers.

    :raises MeshError: On an unknown version, unknown units or a malformed row
    """
    with open(path, newline="", encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines:
        raise MeshError("mesh file is empty", row=1)
    header = MESH_HEADER.match(lines[0].strip())
    if header is None:
        raise MeshError(f"bad mesh header {lines[0]!r}", row=1)
    if header.group(1) != "1":
        raise MeshError(f"unsupported mesh version v{header.group(1)}", row=1)
    units = header.group(2)
    if units not in UNIT_SCALE_TO_KM:
        raise MeshError(f"unsupported mesh units {units!r}", row=1)

    nodes, elements = {}, {}
    section = None
    for row_number, line in enumerate(lines[1:], start=2):
        text = line.strip()
        if not text:
            continue
        if text in ("nodes", "elements"):
            section = text
            continue
        fields = text.split(",")
        try:
            if section == "nodes" and len(fields) == 3:
                key, values = int(fields[0]), (float(fields[1]), float(fields[2]))
                if not all(math.isfinite(v) for v in values):
                    raise MeshError("non-finite node coordinate", row=row_number)
                target = nodes
            elif section == "elements" and len(fields) == 4:
                key, values = int(fields[0]), tuple(int(v) for v in fields[1:])
                target = elements
            else:
                raise MeshError(f"unexpected row {text!r}", row=row_number)
        except ValueError as exc:
            if isinstance(exc, MeshError):
                raise
            raise MeshError(f"cannot parse {text!r}", row=row_number) from exc
        if key in target:
            raise MeshError(f"duplicate id {key}", row=row_number)
        target[key] = values

    for name, table in (("node", nodes), ("element", elements)):
        if sorted(table) != list(range(len(table))):
            raise MeshError(f"{name} ids must be contiguous from 0")
    coords = np.array([nodes[i] for i in range(len(nodes))], dtype=np.float64).reshape(-1, 2)
    coords *= UNIT_SCALE_TO_KM[units]
    return Mesh(coords, np.array([elements[i] for i in range(len(elements))]).reshape(-1, 3))
