import numpy as np
import pytest

from embedbridge.emb1 import read_emb1, write_emb1


class TestEmb1:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        ids = [f"1#{i}" for i in range(10)]
        matrix = rng.normal(size=(10, 6)).astype(np.float32)
        path = tmp_path / "x.emb1"
        write_emb1(ids, matrix, path)
        got_ids, got = read_emb1(path)
        assert got_ids == ids
        np.testing.assert_array_equal(got, matrix)

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="empty"):
            write_emb1([], np.zeros((0, 4), dtype=np.float32), tmp_path / "x.emb1")

    def test_duplicate_ids_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="duplicate"):
            write_emb1(["a", "a"], np.zeros((2, 4), dtype=np.float32), tmp_path / "x.emb1")

    def test_loads_in_retrieval_engine(self, tmp_path):
        """Format parity: the engine's reader accepts our files."""
        from lexsem.dense import read_embeddings

        rng = np.random.default_rng(5)
        ids = [f"2#{i}.1" for i in range(7)]
        matrix = rng.normal(size=(7, 5)).astype(np.float32)
        path = tmp_path / "parity.emb1"
        write_emb1(ids, matrix, path)
        store = read_embeddings(path)
        assert store.ids == ids
        assert store.dim == 5
        expected = matrix / np.linalg.norm(matrix, axis=1, keepdims=True)
        np.testing.assert_allclose(store.matrix, expected, atol=1e-6)
