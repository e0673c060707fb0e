"""Recall@k and mAP@k over runs against gold labels, plus run-file I/O.

Run files use the de-facto shared-task exchange format, six whitespace
columns per line: query_id Q0 passage_key rank score tag.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .corpus import Query
from .ranking import RankedList

Qrels = dict[str, frozenset[str]]


def qrels_from_queries(queries: list[Query]) -> Qrels:
    """Binary relevance judgments keyed by query id; every gold set non-empty."""
    qrels: Qrels = {}
    for q in queries:
        if not q.gold:
            raise ValueError(f"query {q.query_id} has no gold labels")
        if q.query_id in qrels:
            raise ValueError(f"duplicate query id: {q.query_id}")
        qrels[q.query_id] = frozenset(key.canonical() for key in q.gold)
    return qrels


def recall_at_k(run: RankedList, gold: frozenset[str] | set[str], k: int) -> float:
    """Fraction of gold keys present in the top-k entries."""
    if not gold:
        raise ValueError("gold set is empty")
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = sum(1 for key, _ in run.entries[:k] if key in gold)
    return hits / len(gold)


def average_precision_at_k(run: RankedList, gold: frozenset[str] | set[str], k: int) -> float:
    """Average precision truncated at rank k, denominator min(|gold|, k)."""
    if not gold:
        raise ValueError("gold set is empty")
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = 0
    precision_sum = 0.0
    for rank, (key, _) in enumerate(run.entries[:k], start=1):
        if key in gold:
            hits += 1
            precision_sum += hits / rank
    return precision_sum / min(len(gold), k)


@dataclass
class EvalReport:
    k: int
    per_query: dict[str, tuple[float, float]]  # query_id -> (recall, average precision)
    mean_recall: float
    mean_ap: float
    query_count: int
    missing_query_ids: list[str]

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "query_count": self.query_count,
            "mean_recall": self.mean_recall,
            "mean_ap": self.mean_ap,
            "missing_query_ids": sorted(self.missing_query_ids),
            "per_query": {
                qid: {"recall": r, "average_precision": ap}
                for qid, (r, ap) in sorted(self.per_query.items())
            },
        }


def evaluate_run(runs: list[RankedList], qrels: Qrels, k: int) -> EvalReport:
    """Per-query metrics plus arithmetic means.

    Queries present in qrels but missing from the runs count as (0, 0) and
    are listed in the report rather than silently skipped.
    """
    by_query: dict[str, RankedList] = {}
    for run in runs:
        if run.query_id in by_query:
            raise ValueError(f"duplicate run for query {run.query_id}")
        if run.query_id not in qrels:
            raise ValueError(f"run query {run.query_id} not present in qrels")
        by_query[run.query_id] = run
    per_query: dict[str, tuple[float, float]] = {}
    missing: list[str] = []
    for qid, gold in qrels.items():
        run = by_query.get(qid)
        if run is None:
            missing.append(qid)
            per_query[qid] = (0.0, 0.0)
        else:
            per_query[qid] = (recall_at_k(run, gold, k), average_precision_at_k(run, gold, k))
    count = len(per_query)
    mean_recall = sum(r for r, _ in per_query.values()) / count if count else 0.0
    mean_ap = sum(ap for _, ap in per_query.values()) / count if count else 0.0
    return EvalReport(k, per_query, mean_recall, mean_ap, count, missing)


def write_run_file(runs: list[RankedList], path: str | Path, tag: str = "run") -> None:
    """One whitespace-separated line per entry; rank is 1-based ascending."""
    if not tag or any(c.isspace() for c in tag):
        raise ValueError(f"tag must be non-empty and whitespace-free: {tag!r}")
    with open(path, "w", encoding="utf-8") as f:
        for run in runs:
            if not run.query_id or any(c.isspace() for c in run.query_id):
                raise ValueError(f"query id not serializable in run format: {run.query_id!r}")
            for rank, (key, score) in enumerate(run.entries, start=1):
                if any(c.isspace() for c in key):
                    raise ValueError(f"passage key not serializable in run format: {key!r}")
                f.write(f"{run.query_id} Q0 {key} {rank} {score!r} {tag}\n")


def read_run_file(path: str | Path, k: int | None = None) -> list[RankedList]:
    """Exact inverse of write_run_file; malformed lines fail with line numbers."""
    runs: list[RankedList] = []
    current_qid: str | None = None
    current_entries: list[tuple[str, float]] = []
    current_keys: set[str] = set()
    finished: set[str] = set()

    def flush():
        if current_qid is not None:
            runs.append(RankedList(current_qid, list(current_entries)))
            finished.add(current_qid)

    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 6:
                raise ValueError(f"{path}:{lineno}: expected 6 fields, got {len(parts)}")
            qid, _q0, key, rank_text, score_text, _tag = parts
            try:
                rank = int(rank_text)
                score = float(score_text)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
            if qid != current_qid:
                if qid in finished:
                    raise ValueError(f"{path}:{lineno}: query {qid} appears in two separate blocks")
                flush()
                current_qid, current_entries, current_keys = qid, [], set()
            if rank != len(current_entries) + 1:
                raise ValueError(
                    f"{path}:{lineno}: rank {rank} out of sequence (expected {len(current_entries) + 1})"
                )
            if k is not None and rank > k:
                raise ValueError(f"{path}:{lineno}: more than k={k} entries for query {qid}")
            if current_entries:
                prev_key, prev_score = current_entries[-1]
                if score > prev_score:
                    raise ValueError(f"{path}:{lineno}: scores increase ({prev_score} then {score})")
                if score == prev_score and key < prev_key:
                    raise ValueError(
                        f"{path}:{lineno}: equal scores out of key order ({prev_key} then {key})"
                    )
            if key in current_keys:
                raise ValueError(f"{path}:{lineno}: duplicate key {key} for query {qid}")
            current_keys.add(key)
            current_entries.append((key, score))
    flush()
    return runs
