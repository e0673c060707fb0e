import struct
import tempfile
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lexsem.dense import (
    EMB1_MAGIC,
    EmbeddingStore,
    dense_search,
    read_embeddings,
    write_embeddings,
)


def make_store(ids, rows):
    return EmbeddingStore(ids, np.asarray(rows, dtype=np.float32))


class TestEmbeddingStore:
    def test_scaled_basis_normalized(self):
        store = make_store(["a", "b", "c"], [[3, 0, 0, 0], [0, 5, 0, 0], [0, 0, 0.1, 0]])
        assert store.dim == 4
        np.testing.assert_allclose(np.linalg.norm(store.matrix, axis=1), 1.0, atol=1e-4)
        np.testing.assert_allclose(store.vector("b"), [0, 1, 0, 0], atol=1e-6)

    def test_duplicate_id_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            make_store(["a", "a"], [[1, 0], [0, 1]])

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError, match="zero-norm"):
            make_store(["a", "b"], [[1, 0], [0, 0]])

    def test_unknown_id(self):
        store = make_store(["a"], [[1.0]])
        with pytest.raises(KeyError):
            store.vector("b")


class TestEmb1Format:
    def test_round_trip_random_vectors(self, tmp_path):
        rng = np.random.default_rng(7)
        ids = [f"id-{i}" for i in range(40)]
        rows = rng.normal(size=(40, 16)).astype(np.float32)
        store = EmbeddingStore(ids, rows)
        path = tmp_path / "v.emb1"
        write_embeddings(store, path)
        loaded = read_embeddings(path)
        assert loaded.ids == ids
        assert loaded.dim == 16
        np.testing.assert_allclose(loaded.matrix, store.matrix, atol=1e-6)

    def test_dim_one_round_trip(self, tmp_path):
        store = make_store(["x"], [[2.5]])
        path = tmp_path / "one.emb1"
        write_embeddings(store, path)
        loaded = read_embeddings(path)
        assert loaded.ids == ["x"]
        assert loaded.matrix[0, 0] == pytest.approx(1.0)

    def test_empty_store_write_rejected(self, tmp_path):
        store = EmbeddingStore([], np.zeros((0, 4), dtype=np.float32))
        with pytest.raises(ValueError, match="empty"):
            write_embeddings(store, tmp_path / "none.emb1")

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.emb1"
        path.write_bytes(b"XXXX" + b"\x00" * 16)
        with pytest.raises(ValueError, match="magic"):
            read_embeddings(path)

    def test_bad_version(self, tmp_path):
        path = tmp_path / "bad.emb1"
        path.write_bytes(EMB1_MAGIC + struct.pack("<IIQ", 9, 2, 0))
        with pytest.raises(ValueError, match="version"):
            read_embeddings(path)

    def test_declared_count_exceeds_records(self, tmp_path):
        store = make_store(["a", "b"], [[1, 0], [0, 1]])
        path = tmp_path / "short.emb1"
        write_embeddings(store, path)
        data = bytearray(path.read_bytes())
        data[12:20] = struct.pack("<Q", 3)  # claim 3 records, file holds 2
        path.write_bytes(bytes(data))
        with pytest.raises(ValueError, match="truncated"):
            read_embeddings(path)

    def test_truncated_mid_record(self, tmp_path):
        store = make_store(["a", "b"], [[1, 0], [0, 1]])
        path = tmp_path / "cut.emb1"
        write_embeddings(store, path)
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(ValueError, match="truncated"):
            read_embeddings(path)

    def test_duplicate_id_in_file(self, tmp_path):
        path = tmp_path / "dup.emb1"
        record = struct.pack("<H", 1) + b"a" + struct.pack("<f", 1.0)
        path.write_bytes(EMB1_MAGIC + struct.pack("<IIQ", 1, 1, 2) + record + record)
        with pytest.raises(ValueError, match="duplicate id at record 1"):
            read_embeddings(path)

    def test_zero_vector_in_file(self, tmp_path):
        path = tmp_path / "zero.emb1"
        body = struct.pack("<H", 1) + b"a" + struct.pack("<f", 0.0)
        path.write_bytes(EMB1_MAGIC + struct.pack("<IIQ", 1, 1, 1) + body)
        with pytest.raises(ValueError, match="zero-norm vector at record 0"):
            read_embeddings(path)

    def test_trailing_bytes(self, tmp_path):
        store = make_store(["a"], [[1.0]])
        path = tmp_path / "extra.emb1"
        write_embeddings(store, path)
        path.write_bytes(path.read_bytes() + b"\x00\x00")
        with pytest.raises(ValueError, match="trailing"):
            read_embeddings(path)

    @settings(max_examples=25, deadline=None)
    @given(
        count=st.integers(min_value=1, max_value=12),
        dim=st.integers(min_value=1, max_value=9),
        seed=st.integers(0, 2**31 - 1),
    )
    def test_round_trip_property(self, count, dim, seed):
        rng = np.random.default_rng(seed)
        rows = rng.normal(size=(count, dim))
        rows[np.linalg.norm(rows, axis=1) == 0] = 1.0
        store = EmbeddingStore([f"k{i}" for i in range(count)], rows.astype(np.float32))
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "p.emb1"
            write_embeddings(store, path)
            loaded = read_embeddings(path)
        assert loaded.ids == store.ids
        np.testing.assert_allclose(loaded.matrix, store.matrix, atol=1e-6)


def brute_force_topk(store, query, k):
    """Oracle: full sort of raw dot products against the normalized query."""
    q = np.asarray(query, dtype=np.float32)
    q = q / np.linalg.norm(q)
    scores = store.matrix @ q
    scored = sorted(zip(store.ids, scores.tolist()), key=lambda kv: (-kv[1], kv[0]))
    return [key for key, _ in scored[:k]]


class TestDenseSearch:
    def test_orthonormal_basis(self):
        store = make_store(["e1", "e2", "e3"], np.eye(3))
        result = dense_search(store, [0, 1, 0], 1, query_id="q")
        assert result.entries == [("e2", 1.0)]

    def test_k_larger_than_store(self):
        store = make_store(["e1", "e2", "e3"], np.eye(3))
        result = dense_search(store, [0.5, 0.4, 0.3], 10)
        assert result.keys() == ["e1", "e2", "e3"]

    def test_zero_query_rejected(self):
        store = make_store(["a"], [[1.0, 0.0]])
        with pytest.raises(ValueError, match="zero"):
            dense_search(store, [0.0, 0.0], 1)

    def test_dim_mismatch(self):
        store = make_store(["a"], [[1.0, 0.0]])
        with pytest.raises(ValueError, match="dimension"):
            dense_search(store, [1.0, 0.0, 0.0], 1)

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(42)
        store = EmbeddingStore([f"v{i:03d}" for i in range(200)], rng.normal(size=(200, 8)).astype(np.float32))
        for _ in range(20):
            query = rng.normal(size=8)
            k = int(rng.integers(1, 25))
            assert dense_search(store, query, k).keys() == brute_force_topk(store, query, k)

    def test_prefix_property(self):
        rng = np.random.default_rng(3)
        store = EmbeddingStore([f"v{i}" for i in range(50)], rng.normal(size=(50, 6)).astype(np.float32))
        query = rng.normal(size=6)
        full = dense_search(store, query, 50)
        for k in (1, 5, 17, 50):
            assert dense_search(store, query, k).entries == full.entries[:k]

    def test_cosine_symmetry(self):
        rng = np.random.default_rng(11)
        store = EmbeddingStore([f"v{i}" for i in range(30)], rng.normal(size=(30, 5)).astype(np.float32))
        query = rng.normal(size=5)
        result = dense_search(store, query, 30)
        q = (query / np.linalg.norm(query)).astype(np.float32)
        for key, score in result.entries:
            direct = float(store.vector(key) @ q)
            assert score == pytest.approx(direct, abs=1e-6)

    def test_scores_within_cosine_range(self):
        rng = np.random.default_rng(5)
        store = EmbeddingStore([f"v{i}" for i in range(20)], rng.normal(size=(20, 4)).astype(np.float32))
        result = dense_search(store, rng.normal(size=4), 20)
        for _, score in result.entries:
            assert -1.0 <= score <= 1.0
