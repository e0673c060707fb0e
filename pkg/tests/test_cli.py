import json

import numpy as np
import pytest

from lexsem.cli import main
from lexsem.corpus import load_corpus, load_queries
from lexsem.dense import EmbeddingStore, write_embeddings
from lexsem.evaluation import read_run_file
from lexsem.lexical import build_index, bm25_search


@pytest.fixture
def emb_files(tmp_path, sample_documents, sample_questions):
    """Deterministic EMB1 fixtures for the sample corpus and questions."""
    rng = np.random.default_rng(2024)
    corpus = load_corpus(sample_documents)
    keys = corpus.canonical_keys()
    passage_path = tmp_path / "passages.emb1"
    write_embeddings(EmbeddingStore(keys, rng.normal(size=(len(keys), 12)).astype(np.float32)), passage_path)
    queries = load_queries(sample_questions)
    query_path = tmp_path / "queries.emb1"
    write_embeddings(
        EmbeddingStore([q.query_id for q in queries], rng.normal(size=(len(queries), 12)).astype(np.float32)),
        query_path,
    )
    return passage_path, query_path


def run_cli(*args):
    return main([str(a) for a in args])


class TestRetrieve:
    def test_bm25_matches_library(self, tmp_path, sample_documents, sample_questions, capsys):
        out = tmp_path / "bm25.run"
        code = run_cli(
            "retrieve", "--mode", "bm25", "--corpus", sample_documents,
            "--queries", sample_questions, "--k", "3", "--out", out,
        )
        assert code == 0
        runs = read_run_file(out)
        index = build_index(load_corpus(sample_documents))
        for query, run in zip(load_queries(sample_questions), runs):
            assert run == bm25_search(index, query.text, 3, query_id=query.query_id)

    def test_manifest_written(self, tmp_path, sample_documents, sample_questions):
        out = tmp_path / "bm25.run"
        run_cli(
            "retrieve", "--mode", "bm25", "--corpus", sample_documents,
            "--queries", sample_questions, "--out", out,
        )
        manifest = json.loads((tmp_path / "bm25.run.manifest.json").read_text())
        assert manifest["mode"] == "bm25"
        assert manifest["config"]["k1"] == 1.2
        assert any("queries" in key for key in manifest["inputs"])

    def test_leser_requires_embeddings(self, tmp_path, sample_documents, sample_questions, capsys):
        code = run_cli(
            "retrieve", "--mode", "leser", "--corpus", sample_documents,
            "--queries", sample_questions, "--out", tmp_path / "x.run",
        )
        assert code == 1
        assert capsys.readouterr().err.startswith("error:")

    def test_leser_end_to_end(self, tmp_path, sample_documents, sample_questions, emb_files):
        passage_emb, query_emb = emb_files
        out = tmp_path / "leser.run"
        code = run_cli(
            "retrieve", "--mode", "leser", "--corpus", sample_documents,
            "--queries", sample_questions, "--passage-emb", passage_emb,
            "--query-emb", query_emb, "--k", "3", "--alpha", "0.4",
            "--pool-size", "5", "--out", out,
        )
        assert code == 0
        runs = read_run_file(out)
        assert len(runs) == 5
        assert all(len(run) == 3 for run in runs)

    def test_dense_end_to_end(self, tmp_path, sample_documents, sample_questions, emb_files):
        passage_emb, query_emb = emb_files
        out = tmp_path / "dense.run"
        code = run_cli(
            "retrieve", "--mode", "dense", "--queries", sample_questions,
            "--passage-emb", passage_emb, "--query-emb", query_emb,
            "--k", "2", "--out", out,
        )
        assert code == 0
        assert all(len(run) == 2 for run in read_run_file(out))


class TestIndexCommand:
    def test_build_then_retrieve(self, tmp_path, sample_documents, sample_questions, capsys):
        index_path = tmp_path / "sample.idx"
        assert run_cli("index", "--corpus", sample_documents, "--out", index_path) == 0
        assert "indexed 5 passages" in capsys.readouterr().out
        out = tmp_path / "via_index.run"
        assert run_cli(
            "retrieve", "--mode", "bm25", "--index", index_path,
            "--queries", sample_questions, "--out", out,
        ) == 0
        out2 = tmp_path / "via_corpus.run"
        run_cli(
            "retrieve", "--mode", "bm25", "--corpus", sample_documents,
            "--queries", sample_questions, "--out", out2,
        )
        assert out.read_text() == out2.read_text()


class TestEvaluateCommand:
    def test_report_matches_oracle(self, tmp_path, sample_documents, sample_questions, capsys):
        out = tmp_path / "bm25.run"
        run_cli(
            "retrieve", "--mode", "bm25", "--corpus", sample_documents,
            "--queries", sample_questions, "--out", out,
        )
        capsys.readouterr()
        code = run_cli("evaluate", "--run", out, "--queries", sample_questions, "--k", "10")
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["k"] == 10
        assert report["query_count"] == 5
        assert 0.0 <= report["mean_recall"] <= 1.0
        assert 0.0 <= report["mean_ap"] <= 1.0
        assert set(report["per_query"]) == {"q1", "q2", "q3", "q4", "q5"}

    def test_missing_file_is_error(self, tmp_path, sample_questions, capsys):
        code = run_cli("evaluate", "--run", tmp_path / "nope.run", "--queries", sample_questions)
        assert code == 1
        err = capsys.readouterr().err
        assert err.startswith("error:") and err.count("\n") == 1

    def test_summary_omits_per_query(self, tmp_path, sample_documents, sample_questions, capsys):
        out = tmp_path / "bm25.run"
        run_cli(
            "retrieve", "--mode", "bm25", "--corpus", sample_documents,
            "--queries", sample_questions, "--out", out,
        )
        capsys.readouterr()
        assert run_cli("evaluate", "--run", out, "--queries", sample_questions, "--summary") == 0
        report = json.loads(capsys.readouterr().out)
        assert "per_query" not in report
        assert "mean_recall" in report


class TestConfigFile:
    def test_config_sets_defaults_flags_win(self, tmp_path, sample_documents, sample_questions):
        config = tmp_path / "defaults.cfg"
        config.write_text("k = 2\ntag = fromconfig  # comment\n")
        out1 = tmp_path / "a.run"
        assert run_cli(
            "--config", config, "retrieve", "--mode", "bm25", "--corpus", sample_documents,
            "--queries", sample_questions, "--out", out1,
        ) == 0
        runs = read_run_file(out1)
        assert all(len(run) <= 2 for run in runs)
        assert "fromconfig" in out1.read_text().splitlines()[0]
        # explicit flag beats the config value
        out2 = tmp_path / "b.run"
        assert run_cli(
            "--config", config, "retrieve", "--mode", "bm25", "--corpus", sample_documents,
            "--queries", sample_questions, "--k", "3", "--out", out2,
        ) == 0
        assert any(len(run) == 3 for run in read_run_file(out2))


class TestTuneCommand:
    def test_tune_reports_grid(self, tmp_path, sample_documents, sample_questions, emb_files, capsys):
        passage_emb, query_emb = emb_files
        code = run_cli(
            "tune", "--queries", sample_questions, "--corpus", sample_documents,
            "--passage-emb", passage_emb, "--query-emb", query_emb,
            "--grid", "0.0:1.0:0.25", "--k", "3", "--pool-size", "5",
        )
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert [row["alpha"] for row in report["grid"]] == [0.0, 0.25, 0.5, 0.75, 1.0]
        assert report["selected_alpha"] in [row["alpha"] for row in report["grid"]]
        best = max(report["grid"], key=lambda r: (r["recall_at_k"], -r["alpha"]))
        assert report["selected_alpha"] == best["alpha"]

    def test_comma_grid(self, tmp_path, sample_documents, sample_questions, emb_files, capsys):
        passage_emb, query_emb = emb_files
        code = run_cli(
            "tune", "--queries", sample_questions, "--corpus", sample_documents,
            "--passage-emb", passage_emb, "--query-emb", query_emb,
            "--grid", "0.3,0.7", "--k", "2", "--pool-size", "4",
        )
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert [row["alpha"] for row in report["grid"]] == [0.3, 0.7]


class TestGenerateCommand:
    def test_generate_with_stub(self, tmp_path, sample_documents, sample_questions, capsys):
        from test_generation import StubChatServer

        run_path = tmp_path / "bm25.run"
        run_cli(
            "retrieve", "--mode", "bm25", "--corpus", sample_documents,
            "--queries", sample_questions, "--k", "3", "--out", run_path,
        )
        out = tmp_path / "answers.jsonl"
        with StubChatServer() as stub:
            code = run_cli(
                "generate", "--run", run_path, "--queries", sample_questions,
                "--corpus", sample_documents, "--endpoint", stub.url,
                "--model", "stub", "--out", out,
            )
        assert code == 0
        records = [json.loads(line) for line in out.read_text().splitlines()]
        assert len(records) == 5
        assert all(r["answer"] == "stub answer" for r in records)
