"""Batch text encoding into EMB1 files."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from .config import BridgeConfig
from .data import load_passages, load_questions
from .emb1 import write_emb1

logger = logging.getLogger(__name__)


def load_model(cfg: BridgeConfig):
    from sentence_transformers import SentenceTransformer

    model = SentenceTransformer(cfg.model, device=cfg.device)
    model.eval()
    return model


def _log_truncations(model, texts: list[str], label: str) -> int:
    """Count inputs longer than the model's sequence limit; truncation is silent otherwise."""
    limit = getattr(model, "max_seq_length", None)
    tokenizer = getattr(model, "tokenizer", None)
    if limit is None or tokenizer is None:
        return 0
    lengths = [len(ids) for ids in tokenizer(texts, truncation=False)["input_ids"]]
    truncated = sum(1 for n in lengths if n > limit)
    if truncated:
        logger.warning("%s: %d of %d texts exceed %d tokens and will be truncated",
                       label, truncated, len(texts), limit)
    return truncated


def encode_texts(model, texts: list[str], cfg: BridgeConfig) -> np.ndarray:
    embeddings = model.encode(
        texts,
        batch_size=cfg.encode_batch_size,
        convert_to_numpy=True,
        show_progress_bar=False,
        normalize_embeddings=False,
    )
    return np.asarray(embeddings, dtype=np.float32)


def encode_corpus(corpus_path: str | Path, cfg: BridgeConfig, out_path: str | Path, model=None) -> int:
    """EMB1 file keyed by canonical passage key, in corpus order."""
    passages = load_passages(corpus_path)
    model = model if model is not None else load_model(cfg)
    texts = [text for _, text in passages]
    _log_truncations(model, texts, str(corpus_path))
    matrix = encode_texts(model, texts, cfg)
    write_emb1([key for key, _ in passages], matrix, out_path)
    logger.info("encoded %d passages -> %s", len(passages), out_path)
    return len(passages)


def encode_queries(queries_path: str | Path, cfg: BridgeConfig, out_path: str | Path, model=None) -> int:
    """EMB1 file keyed by query id, in split order."""
    questions = load_questions(queries_path)
    model = model if model is not None else load_model(cfg)
    texts = [q["text"] for q in questions]
    _log_truncations(model, texts, str(queries_path))
    matrix = encode_texts(model, texts, cfg)
    write_emb1([q["query_id"] for q in questions], matrix, out_path)
    logger.info("encoded %d queries -> %s", len(questions), out_path)
    return len(questions)
