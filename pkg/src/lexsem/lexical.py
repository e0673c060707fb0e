"""Tokenization, inverted-index construction, and Okapi BM25 scoring.

The index serves both as the full-corpus baseline retriever and as the
candidate-set scorer inside the fusion reranker; in both roles the scores
use full-corpus statistics (N, df, avgdl).
"""

from __future__ import annotations

import json
import math
import re
import struct
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus
from .ranking import RankedList

# Unicode letters and digits; underscore excluded so "foo_bar" splits.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75

_INDEX_MAGIC = b"LXIX"
_INDEX_VERSION = 1


@dataclass(frozen=True)
class TokenizerConfig:
    lowercase: bool = True
    min_token_len: int = 1

    def __post_init__(self) -> None:
        if self.min_token_len < 1:
            raise ValueError("min_token_len must be >= 1")


def tokenize(text: str, cfg: TokenizerConfig = TokenizerConfig()) -> list[str]:
    """Split on non-alphanumeric boundaries; lowercase and length-filter per cfg."""
    tokens = _TOKEN_RE.findall(text)
    if cfg.lowercase:
        tokens = [t.lower() for t in tokens]
    if cfg.min_token_len > 1:
        tokens = [t for t in tokens if len(t) >= cfg.min_token_len]
    return tokens


class InvertedIndex:
    """Immutable term -> postings index with BM25 statistics.

    postings maps each term to a pair of parallel arrays (passage ordinals
    ascending, term frequencies). Scoring parameters k1/b and the tokenizer
    config are fixed at build time so index and query tokenization always
    match.
    """

    def __init__(
        self,
        keys: list[str],
        doc_len: np.ndarray,
        postings: dict[str, tuple[np.ndarray, np.ndarray]],
        avgdl: float,
        k1: float,
        b: float,
        tokenizer: TokenizerConfig,
    ):
        self.keys = keys
        self.doc_len = doc_len
        self.postings = postings
        self.avgdl = avgdl
        self.k1 = k1
        self.b = b
        self.tokenizer = tokenizer
        self.df = {term: len(ordinals) for term, (ordinals, _) in postings.items()}
        self.key_to_ordinal = {key: i for i, key in enumerate(keys)}
        # Rank of each passage key in lexicographic order, for tie-breaking.
        self._key_rank = np.empty(len(keys), dtype=np.int64)
        self._key_rank[np.argsort(np.asarray(keys, dtype=object), kind="stable")] = np.arange(len(keys))

    @property
    def n_passages(self) -> int:
        return len(self.keys)

    def idf(self, term: str) -> float:
        """Smoothed idf, strictly positive for any indexed term."""
        df = self.df.get(term, 0)
        n = self.n_passages
        return math.log(1.0 + (n - df + 0.5) / (df + 0.5))

    def __eq__(self, other) -> bool:
        if not isinstance(other, InvertedIndex):
            return NotImplemented
        if (
            self.keys != other.keys
            or self.avgdl != other.avgdl
            or self.k1 != other.k1
            or self.b != other.b
            or self.tokenizer != other.tokenizer
            or not np.array_equal(self.doc_len, other.doc_len)
            or self.postings.keys() != other.postings.keys()
        ):
            return False
        return all(
            np.array_equal(self.postings[t][0], other.postings[t][0])
            and np.array_equal(self.postings[t][1], other.postings[t][1])
            for t in self.postings
        )


def build_index(
    corpus: Corpus,
    cfg: TokenizerConfig = TokenizerConfig(),
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> InvertedIndex:
    if len(corpus) == 0:
        raise ValueError("cannot index an empty corpus")
    keys = corpus.canonical_keys()
    doc_len = np.zeros(len(corpus), dtype=np.int64)
    raw: dict[str, tuple[list[int], list[int]]] = {}
    for ordinal, passage in enumerate(corpus):
        tokens = tokenize(passage.text, cfg)
        doc_len[ordinal] = len(tokens)
        for term, tf in Counter(tokens).items():
            ordinals, tfs = raw.setdefault(term, ([], []))
            ordinals.append(ordinal)  # ordinals ascend by construction
            tfs.append(tf)
    postings = {
        term: (np.asarray(ordinals, dtype=np.int32), np.asarray(tfs, dtype=np.int64))
        for term, (ordinals, tfs) in raw.items()
    }
    avgdl = float(doc_len.sum()) / len(corpus)
    return InvertedIndex(keys, doc_len, postings, avgdl, k1, b, cfg)


def bm25_score(index: InvertedIndex, query_tokens: list[str], ordinal: int) -> float:
    """Okapi BM25 score of one passage for the given query tokens.

    Duplicate query tokens each contribute; terms absent from the passage
    contribute zero.
    """
    if not 0 <= ordinal < index.n_passages:
        raise ValueError(f"passage ordinal {ordinal} out of range (N={index.n_passages})")
    score = 0.0
    dl = float(index.doc_len[ordinal])
    for term, count in Counter(query_tokens).items():
        entry = index.postings.get(term)
        if entry is None:
            continue
        ordinals, tfs = entry
        pos = int(np.searchsorted(ordinals, ordinal))
        if pos >= len(ordinals) or ordinals[pos] != ordinal:
            continue
        tf = float(tfs[pos])
        weight = index.idf(term) * (tf * (index.k1 + 1.0)) / (
            tf + index.k1 * (1.0 - index.b + index.b * (dl / index.avgdl))
        )
        score += count * weight
    return score


def bm25_search(index: InvertedIndex, query_text: str, k: int, query_id: str = "") -> RankedList:
    """Top-k passages by BM25 over all passages sharing at least one query term.

    Descending score, ties broken by ascending canonical passage key.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    query_tokens = tokenize(query_text, index.tokenizer)
    scores = np.zeros(index.n_passages, dtype=np.float64)
    matched = np.zeros(index.n_passages, dtype=bool)
    for term, count in Counter(query_tokens).items():
        entry = index.postings.get(term)
        if entry is None:
            continue
        ordinals, tfs = entry
        tf = tfs.astype(np.float64)
        dl = index.doc_len[ordinals].astype(np.float64)
        weight = index.idf(term) * (tf * (index.k1 + 1.0)) / (
            tf + index.k1 * (1.0 - index.b + index.b * (dl / index.avgdl))
        )
        scores[ordinals] += count * weight
        matched[ordinals] = True
    candidates = np.nonzero(matched)[0]
    if len(candidates) == 0:
        return RankedList(query_id, [])
    order = np.lexsort((index._key_rank[candidates], -scores[candidates]))
    top = candidates[order[:k]]
    return RankedList(query_id, [(index.keys[i], float(scores[i])) for i in top])


# ---------------------------------------------------------------------------
# Index persistence. Single binary file, little-endian:
#   magic "LXIX" | u32 version | u32 header_len | header JSON (UTF-8)
#   keys:     n_passages x (u16 byte-length + UTF-8 bytes)
#   doc_len:  n_passages x u32
#   terms:    n_terms (sorted) x (u32 term byte-length + UTF-8 bytes
#             + u32 n_postings + n_postings x (u32 ordinal + u32 tf))
# ---------------------------------------------------------------------------


def save_index(index: InvertedIndex, path: str | Path) -> None:
    header = json.dumps(
        {
            "tokenizer": {
                "lowercase": index.tokenizer.lowercase,
                "min_token_len": index.tokenizer.min_token_len,
            },
            "k1": index.k1,
            "b": index.b,
            "n_passages": index.n_passages,
            "avgdl": index.avgdl,
            "n_terms": len(index.postings),
        },
        sort_keys=True,
    ).encode("utf-8")
    with open(path, "wb") as f:
        f.write(_INDEX_MAGIC)
        f.write(struct.pack("<II", _INDEX_VERSION, len(header)))
        f.write(header)
        for key in index.keys:
            raw = key.encode("utf-8")
            if len(raw) > 0xFFFF:
                raise ValueError(f"passage key too long to serialize: {key[:50]}...")
            f.write(struct.pack("<H", len(raw)))
            f.write(raw)
        f.write(index.doc_len.astype("<u4").tobytes())
        for term in sorted(index.postings):
            ordinals, tfs = index.postings[term]
            raw = term.encode("utf-8")
            f.write(struct.pack("<II", len(raw), len(ordinals)))
            f.write(raw)
            f.write(ordinals.astype("<u4").tobytes())
            f.write(tfs.astype("<u4").tobytes())


def load_index(path: str | Path) -> InvertedIndex:
    with open(path, "rb") as f:
        data = f.read()
    view = memoryview(data)
    if data[:4] != _INDEX_MAGIC:
        raise ValueError(f"{path}: not an index file (bad magic)")
    version, header_len = struct.unpack_from("<II", data, 4)
    if version != _INDEX_VERSION:
        raise ValueError(f"{path}: unsupported index version {version}")
    offset = 12
    header = json.loads(bytes(view[offset : offset + header_len]).decode("utf-8"))
    offset += header_len
    n = header["n_passages"]
    keys = []
    for _ in range(n):
        (length,) = struct.unpack_from("<H", data, offset)
        offset += 2
        keys.append(bytes(view[offset : offset + length]).decode("utf-8"))
        offset += length
    doc_len = np.frombuffer(view, dtype="<u4", count=n, offset=offset).astype(np.int64)
    offset += 4 * n
    postings: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for _ in range(header["n_terms"]):
        term_len, n_post = struct.unpack_from("<II", data, offset)
        offset += 8
        term = bytes(view[offset : offset + term_len]).decode("utf-8")
        offset += term_len
        ordinals = np.frombuffer(view, dtype="<u4", count=n_post, offset=offset).astype(np.int32)
        offset += 4 * n_post
        tfs = np.frombuffer(view, dtype="<u4", count=n_post, offset=offset).astype(np.int64)
        offset += 4 * n_post
        postings[term] = (ordinals, tfs)
    if offset != len(data):
        raise ValueError(f"{path}: trailing bytes after index payload")
    cfg = TokenizerConfig(**header["tokenizer"])
    return InvertedIndex(keys, doc_len, postings, header["avgdl"], header["k1"], header["b"], cfg)
