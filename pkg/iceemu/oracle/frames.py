"""
This module defines frame keys, per-frame fields and the `FrameSet` container,
together with the frames text format.

A FrameSet covers every (melting rate, month) pair exactly once; the fields
are held as one array of shape (rates, months, nodes, 3) with channels
(vx, vy, H).

Frames file format::

    # frames v1 units=m,m/year nodes=<N>
    rate,month,node_id,vx,vy,H
    ...

Rows are sorted by (rate, month, node_id).
"""

import csv
import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, List, Optional

import numpy as np

from iceemu.common.errors import FrameValidationError
from iceemu.common.util import format_float
from iceemu.mesh.mesh import Mesh, read_mesh

FRAMES_HEADER = re.compile(r"^# frames v(\d+) units=m,m/year nodes=(\d+)$")
MONTHS_PER_YEAR = 12


class Provenance(Enum):
    ANALYTIC = "analytic"
    TRANSPORT = "transport"
    IMPORTED = "imported"


@dataclass(frozen=True, order=True)
class FrameKey:
    melting_rate: float
    month_index: int

    @property
    def t(self) -> float:
        """Time in years."""
        return self.month_index / MONTHS_PER_YEAR


@dataclass(frozen=True)
class FrameFields:
    """Per-node velocity components (m/year) and thickness (m) of one frame."""

    vx: np.ndarray
    vy: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        for name in ("vx", "vy", "H"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if not self.vx.shape == self.vy.shape == self.H.shape:
            raise FrameValidationError("vx, vy and H must have the same shape")
        check_fields(np.stack([self.vx, self.vy, self.H], axis=-1))

    @classmethod
    def from_array(cls, values: np.ndarray) -> "FrameFields":
        return cls(values[..., 0], values[..., 1], values[..., 2])

    def to_array(self) -> np.ndarray:
        return np.stack([self.vx, self.vy, self.H], axis=-1)


def check_fields(values: np.ndarray):
    """Reject non-finite entries and negative thickness in an array whose last axis is (vx, vy, H)."""
    if not np.all(np.isfinite(values)):
        raise FrameValidationError("frame fields contain non-finite values")
    if np.any(values[..., 2] < 0):
        raise FrameValidationError("frame thickness contains negative values")


class FrameSet:
    """
    A complete, rectangular collection of frames on one mesh.

    :param mesh: The mesh the fields live on
    :param rates: Strictly increasing melting rates, shape (R,)
    :param months: Number of months per rate (T)
    :param fields: Field values, shape (R, T, N, 3)
    :param provenance: Where the frames came from
    :param metadata: Free-form extra information (clamp counts, audits)
    """

    def __init__(self, mesh: Mesh, rates, months: int, fields, provenance: Provenance, metadata: Optional[Dict] = None):
        rates = np.array(rates, dtype=np.float64).reshape(-1)
        fields = np.asarray(fields, dtype=np.float64)
        if months < 1:
            raise FrameValidationError(f"months must be at least 1, got {months}")
        if np.any(rates < 0) or np.any(np.diff(rates) <= 0):
            raise FrameValidationError("melting rates must be non-negative and strictly increasing")
        expected = (len(rates), months, mesh.num_nodes, 3)
        if fields.shape != expected:
            raise FrameValidationError(f"fields must have shape {expected}, got {fields.shape}")
        check_fields(fields)
        rates.setflags(write=False)
        fields.setflags(write=False)
        self.mesh = mesh
        self.rates = rates
        self.months = months
        self.fields = fields
        self.provenance = Provenance(provenance)
        self.metadata = dict(metadata or {})

    def __len__(self) -> int:
        return len(self.rates) * self.months

    def __iter__(self) -> Iterator[FrameKey]:
        return iter(self.keys())

    def keys(self) -> List[FrameKey]:
        """Frame keys in lexicographic (rate, month) order."""
        return [FrameKey(float(rate), month) for rate in self.rates for month in range(self.months)]

    def index_pairs(self) -> List[tuple]:
        """(rate index, month) pairs in key order."""
        return [(r, month) for r in range(len(self.rates)) for month in range(self.months)]

    def rate_index(self, rate: float) -> int:
        matches = np.flatnonzero(np.isclose(self.rates, rate, rtol=0.0, atol=1e-9))
        if len(matches) == 0:
            raise KeyError(f"melting rate {rate} is not in this frame set")
        return int(matches[0])

    def frame(self, key: FrameKey) -> FrameFields:
        if not 0 <= key.month_index < self.months:
            raise KeyError(f"month {key.month_index} is outside 0..{self.months - 1}")
        return FrameFields.from_array(self.fields[self.rate_index(key.melting_rate), key.month_index])

    def inputs(self, rate_index: int, month: int) -> np.ndarray:
        """Per-node model inputs (x, y, t, m), shape (N, 4)."""
        return frame_inputs(self.mesh, float(self.rates[rate_index]), month)

    def series(self, rate: float) -> np.ndarray:
        """All months of one rate, shape (T, N, 3)."""
        return self.fields[self.rate_index(rate)]

    def subset(self, rates) -> "FrameSet":
        """A FrameSet restricted to the given rates, keeping provenance and metadata."""
        indices = sorted({self.rate_index(rate) for rate in rates})
        return FrameSet(
            self.mesh,
            self.rates[indices],
            self.months,
            self.fields[indices],
            self.provenance,
            self.metadata,
        )

    def __repr__(self) -> str:
        return (
            f"FrameSet(rates={len(self.rates)}, months={self.months}, nodes={self.mesh.num_nodes}, "
            f"provenance={self.provenance.value})"
        )


def frame_inputs(mesh: Mesh, rate: float, month: int) -> np.ndarray:
    """Per-node model inputs (x, y, t, m) for one frame."""
    n = mesh.num_nodes
    return np.column_stack(
        [mesh.node_coords, np.full(n, month / MONTHS_PER_YEAR), np.full(n, float(rate))]
    )


def _frame_rows(frames: FrameSet):
    node_ids = range(frames.mesh.num_nodes)
    for r, rate in enumerate(frames.rates):
        rate_text = format_float(rate)
        for month in range(frames.months):
            block = frames.fields[r, month]
            for node in node_ids:
                vx, vy, thickness = block[node]
                yield (rate_text, month, node, repr(float(vx)), repr(float(vy)), repr(float(thickness)))


def export_frames(frames: FrameSet, path) -> None:
    """Write a FrameSet in the `# frames v1` text format."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(f"# frames v1 units=m,m/year nodes={frames.mesh.num_nodes}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerows(_frame_rows(frames))


def import_frames(mesh_file, frames_file) -> FrameSet:
    """
    Read a mesh file and a frames file into a FrameSet tagged `imported`.

    :raises FrameValidationError: On a header mismatch, a malformed or non-finite row,
        a duplicate row, or a missing (rate, month) combination
    """
    mesh = read_mesh(mesh_file)
    n = mesh.num_nodes
    blocks: Dict[tuple, np.ndarray] = {}
    filled: Dict[tuple, np.ndarray] = {}

    with open(frames_file, newline="", encoding="utf-8") as f:
        header = f.readline().strip()
        match = FRAMES_HEADER.match(header)
        if match is None:
            raise FrameValidationError(f"bad frames header {header!r}", row=1)
        if match.group(1) != "1":
            raise FrameValidationError(f"unsupported frames version v{match.group(1)}", row=1)
        if int(match.group(2)) != n:
            raise FrameValidationError(f"frames declare {match.group(2)} nodes but the mesh has {n}", row=1)

        for row_number, row in enumerate(csv.reader(f), start=2):
            if not row:
                continue
            if len(row) != 6:
                raise FrameValidationError(f"expected 6 columns, got {len(row)}", row=row_number)
            try:
                rate, month, node = float(row[0]), int(row[1]), int(row[2])
                values = (float(row[3]), float(row[4]), float(row[5]))
            except ValueError as exc:
                raise FrameValidationError(f"cannot parse {','.join(row)!r}", row=row_number) from exc
            if not math.isfinite(rate) or rate < 0 or month < 0:
                raise FrameValidationError(f"invalid frame key ({row[0]}, {row[1]})", row=row_number)
            if not 0 <= node < n:
                raise FrameValidationError(f"node id {node} outside 0..{n - 1}", row=row_number)
            for name, text, value in zip(("vx", "vy", "H"), row[3:], values):
                if not math.isfinite(value):
                    raise FrameValidationError(f"non-finite {name} {text!r}", row=row_number)
            if values[2] < 0:
                raise FrameValidationError(f"negative thickness {values[2]}", row=row_number)
            key = (rate, month)
            if key not in blocks:
                blocks[key] = np.zeros((n, 3))
                filled[key] = np.zeros(n, dtype=bool)
            if filled[key][node]:
                raise FrameValidationError(f"duplicate row for rate={rate} month={month} node={node}", row=row_number)
            blocks[key][node] = values
            filled[key][node] = True

    if not blocks:
        raise FrameValidationError("frames file contains no rows")
    rates = sorted({rate for rate, _ in blocks})
    months = 1 + max(month for _, month in blocks)
    fields = np.zeros((len(rates), months, n, 3))
    for r, rate in enumerate(rates):
        for month in range(months):
            key = (rate, month)
            if key not in blocks:
                raise FrameValidationError(f"missing frame rate={rate} month={month}")
            if not filled[key].all():
                missing = int(np.flatnonzero(~filled[key])[0])
                raise FrameValidationError(f"missing node {missing} for rate={rate} month={month}")
            fields[r, month] = blocks[key]
    return FrameSet(mesh, rates, months, fields, Provenance.IMPORTED)
