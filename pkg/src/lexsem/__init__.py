"""Hybrid lexical-semantic retrieval engine for regulatory question answering.

Pipeline: dense candidate retrieval over precomputed embeddings, BM25
reranking of the candidate pool via weighted score aggregation, plus
Recall@k / mAP@k evaluation and answer-generation plumbing.
"""

__version__ = "0.1.0"
