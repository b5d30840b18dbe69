"""
This module reads and writes trained-model artifacts.

Binary layout, little-endian throughout::

    b"GEMU1"                    magic
    u16                         format version
    u8 + ascii                  model kind tag ("gcn" or "fcn")
    u32 + utf-8 JSON            metadata (configs, graph options, grid spec)
    u32                         layer count
    per layer:
        u8 ndim, ndim x u32     weight dimensions
        u8                      1 if a bias follows
        f8 * prod(dims)         weight values, row-major
        f8 * dims[0]            bias values
    u32                         normalization array count
    per array:
        u8 + ascii              name
        u32                     length
        f8 * length             values
"""

import json
import struct
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from iceemu.common.errors import ArtifactError
from iceemu.nn.params import LayerParams, ModelParams

MAGIC = b"GEMU1"
VERSION = 1
KINDS = ("gcn", "fcn")


@dataclass
class ModelArtifact:
    kind: str
    meta: Dict
    params: ModelParams
    norm: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ArtifactError(f"unknown model kind {self.kind!r}")


def _pack_text(fmt: str, text: str) -> bytes:
    data = text.encode("utf-8")
    return struct.pack(fmt, len(data)) + data


def encode_artifact(artifact: ModelArtifact) -> bytes:
    chunks = [MAGIC, struct.pack("<H", VERSION), _pack_text("<B", artifact.kind)]
    chunks.append(_pack_text("<I", json.dumps(artifact.meta, sort_keys=True)))
    chunks.append(struct.pack("<I", len(artifact.params)))
    for layer in artifact.params:
        dims = layer.weight.shape
        chunks.append(struct.pack(f"<B{len(dims)}I", len(dims), *dims))
        chunks.append(struct.pack("<B", 0 if layer.bias is None else 1))
        chunks.append(layer.weight.astype("<f8").tobytes())
        if layer.bias is not None:
            chunks.append(layer.bias.astype("<f8").tobytes())
    chunks.append(struct.pack("<I", len(artifact.norm)))
    for name in sorted(artifact.norm):
        values = np.asarray(artifact.norm[name], dtype="<f8").reshape(-1)
        chunks.append(_pack_text("<B", name))
        chunks.append(struct.pack("<I", len(values)))
        chunks.append(values.tobytes())
    return b"".join(chunks)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise ArtifactError(f"artifact truncated at byte {self.offset}")
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def text(self, fmt: str) -> str:
        (length,) = self.unpack(fmt)
        try:
            return self.take(length).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ArtifactError("artifact contains invalid text") from exc

    def doubles(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64)


def decode_artifact(data: bytes) -> ModelArtifact:
    """
    :raises ArtifactError: On a bad magic, unsupported version or truncated data
    """
    reader = _Reader(data)
    if reader.take(len(MAGIC)) != MAGIC:
        raise ArtifactError("not a model artifact (bad magic)")
    (version,) = reader.unpack("<H")
    if version != VERSION:
        raise ArtifactError(f"unsupported artifact version {version}")
    kind = reader.text("<B")
    try:
        meta = json.loads(reader.text("<I"))
    except json.JSONDecodeError as exc:
        raise ArtifactError("artifact metadata is not valid JSON") from exc

    layers = []
    (layer_count,) = reader.unpack("<I")
    for _ in range(layer_count):
        (ndim,) = reader.unpack("<B")
        dims = reader.unpack(f"<{ndim}I")
        (has_bias,) = reader.unpack("<B")
        weight = reader.doubles(int(np.prod(dims))).reshape(dims)
        bias = reader.doubles(dims[0]) if has_bias else None
        layers.append(LayerParams(weight, bias))

    norm = {}
    (norm_count,) = reader.unpack("<I")
    for _ in range(norm_count):
        name = reader.text("<B")
        (length,) = reader.unpack("<I")
        norm[name] = reader.doubles(length)
    if reader.offset != len(data):
        raise ArtifactError(f"{len(data) - reader.offset} trailing bytes after artifact")
    return ModelArtifact(kind, meta, ModelParams(layers), norm)


def write_artifact(artifact: ModelArtifact, path) -> None:
    with open(path, "wb") as f:
        f.write(encode_artifact(artifact))


def read_artifact(path) -> ModelArtifact:
    with open(path, "rb") as f:
        return decode_artifact(f.read())
