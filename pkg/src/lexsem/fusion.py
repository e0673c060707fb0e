"""Candidate reranking by weighted aggregation of normalized scores.

The reranker takes the dense top-N pool, rescores it with BM25 against
full-corpus statistics, min-max normalizes both score lists over the pool,
and combines them as alpha * dense + (1 - alpha) * bm25. Also dispatches
the three retrieval modes (bm25 / dense / leser) behind one entry point.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .corpus import Query
from .dense import EmbeddingStore, dense_search
from .evaluation import evaluate_run, qrels_from_queries
from .lexical import InvertedIndex, bm25_score, bm25_search, tokenize
from .ranking import RankedList

__all__ = [
    "RankedList",
    "FusionConfig",
    "Resources",
    "minmax_normalize",
    "combine_scores",
    "leser_rerank",
    "retrieve",
    "tune_alpha",
    "MODES",
]

MODES = ("bm25", "dense", "leser")

OBJECTIVES = ("recall@10", "map@10")


@dataclass(frozen=True)
class FusionConfig:
    """Weight and pool sizes for the rerank stage.

    alpha weighs the normalized dense score; 1 - alpha the normalized BM25
    score. The default alpha applies when tuning is skipped.
    """

    alpha: float = 0.3
    pool_size: int = 20
    output_k: int = 10

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.pool_size < 1:
            raise ValueError("pool_size must be >= 1")
        if not 1 <= self.output_k <= self.pool_size:
            raise ValueError(
                f"output_k must be in [1, pool_size], got {self.output_k} with pool_size {self.pool_size}"
            )


@dataclass
class Resources:
    """Retrieval resources; each mode requires a subset of these."""

    index: InvertedIndex | None = None
    passage_store: EmbeddingStore | None = None
    query_store: EmbeddingStore | None = None
    fusion: FusionConfig = field(default_factory=FusionConfig)


def minmax_normalize(scores: list[float]) -> list[float]:
    """Map scores affinely onto [0, 1]; a constant list maps to all 0.5."""
    if not scores:
        raise ValueError("cannot normalize an empty score list")
    lo, hi = min(scores), max(scores)
    if lo == hi:
        return [0.5] * len(scores)
    span = hi - lo
    return [(s - lo) / span for s in scores]


def combine_scores(dense_scores: list[float], bm25_scores: list[float], alpha: float) -> list[float]:
    """Weighted aggregation of the two score lists, normalized over the pool."""
    if len(dense_scores) != len(bm25_scores):
        raise ValueError("score lists must have equal length")
    dense_norm = minmax_normalize(dense_scores)
    bm25_norm = minmax_normalize(bm25_scores)
    return [alpha * d + (1.0 - alpha) * s for d, s in zip(dense_norm, bm25_norm)]


def leser_rerank(
    query_id: str,
    query_text: str,
    dense_candidates: RankedList,
    index: InvertedIndex,
    cfg: FusionConfig,
) -> RankedList:
    """Rerank the dense candidate pool by combined dense + BM25 score.

    Output keys are always a subset of the candidate keys; reranking never
    introduces passages.
    """
    entries = dense_candidates.entries
    if len(entries) > cfg.pool_size:
        raise ValueError(f"{len(entries)} candidates exceed pool_size {cfg.pool_size}")
    if not entries:
        return RankedList(query_id, [])
    ordinals = []
    for key, _ in entries:
        ordinal = index.key_to_ordinal.get(key)
        if ordinal is None:
            raise ValueError(f"candidate key not in index: {key}")
        ordinals.append(ordinal)
    query_tokens = tokenize(query_text, index.tokenizer)
    bm25_scores = [bm25_score(index, query_tokens, o) for o in ordinals]
    combined = combine_scores([s for _, s in entries], bm25_scores, cfg.alpha)
    reranked = RankedList.from_scores(query_id, [(key, c) for (key, _), c in zip(entries, combined)])
    return reranked.top(cfg.output_k)


def retrieve(mode: str, query: Query, resources: Resources, k: int) -> RankedList:
    """Run one query through the requested retrieval mode."""
    if mode not in MODES:
        raise ValueError(f"unknown retrieval mode: {mode!r} (expected one of {MODES})")
    if mode == "bm25":
        if resources.index is None:
            raise ValueError("bm25 mode requires an index")
        return bm25_search(resources.index, query.text, k, query_id=query.query_id)
    if resources.passage_store is None or resources.query_store is None:
        raise ValueError(f"{mode} mode requires passage and query embedding stores")
    if query.query_id not in resources.query_store:
        raise ValueError(f"no embedding for query {query.query_id}")
    query_vec = resources.query_store.vector(query.query_id)
    if mode == "dense":
        return dense_search(resources.passage_store, query_vec, k, query_id=query.query_id)
    # leser: dense pool, then lexical rerank truncated to k
    if resources.index is None:
        raise ValueError("leser mode requires an index")
    cfg = replace(resources.fusion, output_k=k)
    pool = dense_search(resources.passage_store, query_vec, cfg.pool_size, query_id=query.query_id)
    return leser_rerank(query.query_id, query.text, pool, resources.index, cfg)


def tune_alpha(
    dev_queries: list[Query],
    resources: Resources,
    grid: list[float],
    objective: str = "recall@10",
) -> tuple[float, list[dict]]:
    """Grid-search alpha on a labeled dev split.

    Returns the alpha maximizing the objective (ties toward smaller alpha)
    plus the full per-alpha report for audit.
    """
    if not grid:
        raise ValueError("alpha grid is empty")
    for a in grid:
        if not 0.0 <= a <= 1.0:
            raise ValueError(f"grid alpha out of [0, 1]: {a}")
    if objective not in OBJECTIVES:
        raise ValueError(f"objective must be one of {OBJECTIVES}, got {objective!r}")
    if resources.index is None or resources.passage_store is None or resources.query_store is None:
        raise ValueError("tuning requires an index and both embedding stores")
    for q in dev_queries:
        if not q.gold:
            raise ValueError(f"query {q.query_id} has no gold labels")

    # The dense pool and the pool's BM25 scores do not depend on alpha;
    # compute them once per query and sweep alpha over the cached scores.
    cfg = resources.fusion
    cached: list[tuple[Query, list[tuple[str, float]], list[float]]] = []
    for q in dev_queries:
        pool = dense_search(
            resources.passage_store, resources.query_store.vector(q.query_id), cfg.pool_size, query_id=q.query_id
        )
        query_tokens = tokenize(q.text, resources.index.tokenizer)
        bm25_scores = [
            bm25_score(resources.index, query_tokens, resources.index.key_to_ordinal[key])
            for key, _ in pool.entries
        ]
        cached.append((q, pool.entries, bm25_scores))

    qrels = qrels_from_queries(dev_queries)
    report = []
    for alpha in grid:
        runs = []
        for q, entries, bm25_scores in cached:
            if not entries:
                runs.append(RankedList(q.query_id, []))
                continue
            combined = combine_scores([s for _, s in entries], bm25_scores, alpha)
            ranked = RankedList.from_scores(q.query_id, [(key, c) for (key, _), c in zip(entries, combined)])
            runs.append(ranked.top(cfg.output_k))
        result = evaluate_run(runs, qrels, cfg.output_k)
        report.append(
            {"alpha": alpha, "recall_at_k": result.mean_recall, "map_at_k": result.mean_ap}
        )
    metric = "recall_at_k" if objective == "recall@10" else "map_at_k"
    best = min(report, key=lambda row: (-row[metric], row["alpha"]))
    return best["alpha"], report
