#!/usr/bin/env python3
"""End-to-end retrieval benchmark driver.

Scores the BM25 baseline on the test split, and, when embedding files are
supplied (see the embedbridge package), tunes the fusion weight on the dev
split and adds the dense and reranked rows.

Usage:
    python scripts/benchmark_retrieval.py --data data/ObliQA --workdir runs/ \
        [--passage-emb passages.emb1 --query-emb-dev dev.emb1 --query-emb-test test.emb1]
"""

import argparse
import json
import sys
from pathlib import Path

from lexsem.corpus import load_corpus, load_queries
from lexsem.dense import read_embeddings
from lexsem.evaluation import evaluate_run, qrels_from_queries, write_run_file
from lexsem.fusion import FusionConfig, Resources, retrieve, tune_alpha
from lexsem.lexical import build_index


def evaluate(runs, queries, k):
    report = evaluate_run(runs, qrels_from_queries(queries), k)
    return report.mean_recall, report.mean_ap


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data", required=True, help="dataset root (StructuredRegulatoryDocuments/, ObliQA_*.json)")
    parser.add_argument("--workdir", default="runs", help="where run files are written")
    parser.add_argument("--k", type=int, default=10)
    parser.add_argument("--pool-size", type=int, default=20)
    parser.add_argument("--grid", default="0.0:1.0:0.1")
    parser.add_argument("--passage-emb")
    parser.add_argument("--query-emb-dev")
    parser.add_argument("--query-emb-test")
    args = parser.parse_args()

    data = Path(args.data)
    corpus_dir = data / "StructuredRegulatoryDocuments"
    if not corpus_dir.is_dir():
        print(f"error: {corpus_dir} not found", file=sys.stderr)
        return 1
    workdir = Path(args.workdir)
    workdir.mkdir(parents=True, exist_ok=True)

    print("loading corpus and splits ...")
    corpus = load_corpus(corpus_dir)
    test_queries = load_queries(data / "ObliQA_test.json", require_gold=True)
    print(f"  {len(corpus)} passages, {len(test_queries)} test queries")

    print("building index ...")
    index = build_index(corpus)

    rows = []
    resources = Resources(index=index)
    print("bm25 retrieval on test split ...")
    bm25_runs = [retrieve("bm25", q, resources, args.k) for q in test_queries]
    write_run_file(bm25_runs, workdir / "bm25_test.run", tag="bm25")
    rows.append(("BM25", *evaluate(bm25_runs, test_queries, args.k)))

    if args.passage_emb and args.query_emb_test:
        resources.passage_store = read_embeddings(args.passage_emb)
        resources.query_store = read_embeddings(args.query_emb_test)

        print("dense retrieval on test split ...")
        dense_runs = [retrieve("dense", q, resources, args.k) for q in test_queries]
        write_run_file(dense_runs, workdir / "dense_test.run", tag="dense")
        rows.append(("dense", *evaluate(dense_runs, test_queries, args.k)))

        alpha = 0.3
        if args.query_emb_dev:
            print("tuning fusion weight on dev split ...")
            dev_queries = load_queries(data / "ObliQA_dev.json", require_gold=True)
            dev_resources = Resources(
                index=index,
                passage_store=resources.passage_store,
                query_store=read_embeddings(args.query_emb_dev),
                fusion=FusionConfig(pool_size=args.pool_size, output_k=args.k),
            )
            grid = [round(i * 0.1, 10) for i in range(11)] if args.grid == "0.0:1.0:0.1" else [
                float(x) for x in args.grid.split(",")
            ]
            alpha, report = tune_alpha(dev_queries, dev_resources, grid)
            (workdir / "tune_report.json").write_text(json.dumps(report, indent=2))
            print(f"  selected alpha = {alpha}")

        print("reranked retrieval on test split ...")
        resources.fusion = FusionConfig(alpha=alpha, pool_size=args.pool_size, output_k=args.k)
        leser_runs = [retrieve("leser", q, resources, args.k) for q in test_queries]
        write_run_file(leser_runs, workdir / "leser_test.run", tag="leser")
        rows.append((f"LeSeR (alpha={alpha})", *evaluate(leser_runs, test_queries, args.k)))

    print(f"\n{'model':<24} {'Recall@' + str(args.k):>12} {'mAP@' + str(args.k):>12}")
    for name, recall, mean_ap in rows:
        print(f"{name:<24} {recall:>12.4f} {mean_ap:>12.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
