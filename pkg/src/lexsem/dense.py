"""Embedding store with exact cosine top-k search, plus the EMB1 file format.

EMB1 is the sole contract for importing precomputed embeddings (corpus
passages keyed by canonical passage key, query splits keyed by query id).
Layout, little-endian: magic "EMB1" | u32 version=1 | u32 dim | u64 count |
per record: u16 id byte-length, id UTF-8 bytes, dim x float32.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .ranking import RankedList

EMB1_MAGIC = b"EMB1"
EMB1_VERSION = 1

# Import normalization leaves rows unit-length up to float32 rounding.
_NORM_TOLERANCE = 1e-4


class EmbeddingStore:
    """L2-normalized fixed-dimension vectors keyed by unique string ids."""

    def __init__(self, ids: list[str], matrix: np.ndarray, normalize: bool = True):
        matrix = np.ascontiguousarray(matrix, dtype=np.float32)
        if matrix.ndim != 2 or matrix.shape[1] < 1:
            raise ValueError(f"matrix must be 2-D with dim >= 1, got shape {matrix.shape}")
        if len(ids) != matrix.shape[0]:
            raise ValueError(f"{len(ids)} ids for {matrix.shape[0]} rows")
        seen: set[str] = set()
        for id_ in ids:
            if id_ in seen:
                raise ValueError(f"duplicate id: {id_}")
            seen.add(id_)
        norms = np.linalg.norm(matrix, axis=1)
        if normalize:
            zero = np.nonzero(norms == 0.0)[0]
            if len(zero):
                raise ValueError(f"zero-norm vector at record {zero[0]} (id {ids[zero[0]]})")
            matrix = matrix / norms[:, None]
        elif len(norms) and np.max(np.abs(norms - 1.0)) > _NORM_TOLERANCE:
            bad = int(np.argmax(np.abs(norms - 1.0)))
            raise ValueError(f"row {bad} (id {ids[bad]}) is not unit-norm: {norms[bad]}")
        self.ids = list(ids)
        self.matrix = matrix
        self.id_to_row = {id_: i for i, id_ in enumerate(self.ids)}
        # Rank of each id in lexicographic order, for tie-breaking.
        self._id_rank = np.empty(len(self.ids), dtype=np.int64)
        self._id_rank[np.argsort(np.asarray(self.ids, dtype=object), kind="stable")] = np.arange(len(self.ids))

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, id_: str) -> bool:
        return id_ in self.id_to_row

    def vector(self, id_: str) -> np.ndarray:
        row = self.id_to_row.get(id_)
        if row is None:
            raise KeyError(f"no embedding for id: {id_}")
        return self.matrix[row]


def read_embeddings(path: str | Path) -> EmbeddingStore:
    """Load an EMB1 file; rows are L2-normalized in place."""
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != EMB1_MAGIC:
        raise ValueError(f"{path}: not an EMB1 file (bad magic)")
    if len(data) < 20:
        raise ValueError(f"{path}: truncated header")
    version, dim, count = struct.unpack_from("<IIQ", data, 4)
    if version != EMB1_VERSION:
        raise ValueError(f"{path}: unsupported EMB1 version {version}")
    if dim < 1:
        raise ValueError(f"{path}: invalid dimension {dim}")
    if count * (2 + 4 * dim) > len(data) - 20:
        raise ValueError(f"{path}: truncated: declared count {count} exceeds file contents")
    offset = 20
    ids: list[str] = []
    rows = np.empty((count, dim), dtype=np.float32)
    seen: set[str] = set()
    for record in range(count):
        if offset + 2 > len(data):
            raise ValueError(f"{path}: truncated at record {record}")
        (id_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        if offset + id_len + 4 * dim > len(data):
            raise ValueError(f"{path}: truncated at record {record}")
        id_ = data[offset : offset + id_len].decode("utf-8")
        offset += id_len
        if id_ in seen:
            raise ValueError(f"{path}: duplicate id at record {record}: {id_}")
        seen.add(id_)
        rows[record] = np.frombuffer(data, dtype="<f4", count=dim, offset=offset)
        offset += 4 * dim
        ids.append(id_)
    if offset != len(data):
        raise ValueError(f"{path}: trailing bytes after {count} records")
    try:
        return EmbeddingStore(ids, rows)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def write_embeddings(store: EmbeddingStore, path: str | Path) -> None:
    """Write an EMB1 file; read_embeddings is the inverse up to float32 precision."""
    if len(store) == 0:
        raise ValueError("refusing to write an empty embedding store")
    with open(path, "wb") as f:
        f.write(EMB1_MAGIC)
        f.write(struct.pack("<IIQ", EMB1_VERSION, store.dim, len(store)))
        matrix = store.matrix.astype("<f4", copy=False)
        for i, id_ in enumerate(store.ids):
            raw = id_.encode("utf-8")
            if len(raw) > 0xFFFF:
                raise ValueError(f"id too long to serialize: {id_[:50]}...")
            f.write(struct.pack("<H", len(raw)))
            f.write(raw)
            f.write(matrix[i].tobytes())


def dense_search(store: EmbeddingStore, query_vec: np.ndarray, k: int, query_id: str = "") -> RankedList:
    """Exact top-k rows by cosine similarity (dot product on unit rows).

    Descending score, ties broken by ascending id; the query vector is
    L2-normalized here.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    q = np.asarray(query_vec, dtype=np.float32).reshape(-1)
    if q.shape[0] != store.dim:
        raise ValueError(f"query dimension {q.shape[0]} != store dimension {store.dim}")
    norm = float(np.linalg.norm(q))
    if norm == 0.0:
        raise ValueError("zero query vector")
    q = q / norm
    scores = np.clip(store.matrix @ q, -1.0, 1.0)
    order = np.lexsort((store._id_rank, -scores))
    top = order[:k]
    return RankedList(query_id, [(store.ids[i], float(scores[i])) for i in top])
