"""EMB1 binary embedding files.

Little-endian layout: magic "EMB1" | u32 version=1 | u32 dim | u64 count |
per record: u16 id byte-length, id UTF-8 bytes, dim x float32. This is the
interchange contract with the retrieval engine.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"EMB1"
VERSION = 1


def write_emb1(ids: list[str], matrix: np.ndarray, path: str | Path) -> None:
    matrix = np.ascontiguousarray(matrix, dtype="<f4")
    if matrix.ndim != 2:
        raise ValueError(f"matrix must be 2-D, got shape {matrix.shape}")
    if len(ids) != matrix.shape[0]:
        raise ValueError(f"{len(ids)} ids for {matrix.shape[0]} rows")
    if len(ids) == 0:
        raise ValueError("refusing to write an empty embedding file")
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate ids")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<IIQ", VERSION, matrix.shape[1], len(ids)))
        for i, id_ in enumerate(ids):
            raw = id_.encode("utf-8")
            if len(raw) > 0xFFFF:
                raise ValueError(f"id too long: {id_[:50]}...")
            f.write(struct.pack("<H", len(raw)))
            f.write(raw)
            f.write(matrix[i].tobytes())


def read_emb1(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Raw ids and float32 rows (no normalization; self-check use only)."""
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != MAGIC:
        raise ValueError(f"{path}: bad magic")
    version, dim, count = struct.unpack_from("<IIQ", data, 4)
    if version != VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    offset = 20
    ids, rows = [], np.empty((count, dim), dtype=np.float32)
    for record in range(count):
        if offset + 2 > len(data):
            raise ValueError(f"{path}: truncated at record {record}")
        (id_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        if offset + id_len + 4 * dim > len(data):
            raise ValueError(f"{path}: truncated at record {record}")
        ids.append(data[offset : offset + id_len].decode("utf-8"))
        offset += id_len
        rows[record] = np.frombuffer(data, dtype="<f4", count=dim, offset=offset)
        offset += 4 * dim
    if offset != len(data):
        raise ValueError(f"{path}: trailing bytes")
    return ids, rows
