"""Contrastive fine-tuning on (question, gold passage) pairs.

Every in-batch positive serves as a negative for the other anchors, in both
the question-to-passage and passage-to-question directions. The dev split is
scored after each epoch and the best checkpoint is what gets exported.
"""

from __future__ import annotations

import logging
import random
from pathlib import Path

import numpy as np
import torch

from .config import BridgeConfig
from .data import build_pairs, load_passages, load_questions
from .encode import encode_texts, load_model

logger = logging.getLogger(__name__)


def _features(model, texts: list[str]) -> dict:
    """Tokenized inputs on the model's device."""
    preprocess = getattr(model, "preprocess", None) or model.tokenize
    features = preprocess(texts)
    return {k: v.to(model.device) if torch.is_tensor(v) else v for k, v in features.items()}


def make_loss(model, scale: float):
    """Symmetric in-batch-negatives ranking loss from the training toolkit."""
    from sentence_transformers import losses

    return losses.MultipleNegativesRankingLoss(
        model,
        scale=scale,
        directions=("query_to_doc", "doc_to_query"),
        partition_mode="per_direction",
    )


def dev_recall_at_k(model, questions: list[dict], passages: list[tuple[str, str]], cfg: BridgeConfig, k: int = 10) -> float:
    """Mean fraction of gold passages retrieved in the cosine top-k."""
    keys = [key for key, _ in passages]
    passage_matrix = encode_texts(model, [text for _, text in passages], cfg)
    passage_matrix = passage_matrix / np.linalg.norm(passage_matrix, axis=1, keepdims=True)
    query_matrix = encode_texts(model, [q["text"] for q in questions], cfg)
    query_matrix = query_matrix / np.linalg.norm(query_matrix, axis=1, keepdims=True)
    scores = query_matrix @ passage_matrix.T
    recalls = []
    for row, question in zip(scores, questions):
        top = [keys[i] for i in np.argsort(-row, kind="stable")[:k]]
        gold = set(question["gold"])
        recalls.append(len(gold & set(top)) / len(gold))
    return float(np.mean(recalls))


def finetune_mnsr(
    train_path: str | Path,
    corpus_path: str | Path,
    dev_path: str | Path,
    cfg: BridgeConfig,
    out_dir: str | Path,
    eval_k: int = 10,
) -> Path:
    """Fine-tune cfg.model and export the best-on-dev checkpoint to out_dir."""
    out_dir = Path(out_dir)
    passages = load_passages(corpus_path)
    train_questions = load_questions(train_path, require_gold=True)
    dev_questions = load_questions(dev_path, require_gold=True)
    pairs = build_pairs(train_questions, passages)
    # resolve dev gold keys up front so failures precede any training
    build_pairs(dev_questions, passages)

    torch.manual_seed(cfg.seed)
    model = load_model(cfg)
    loss_fn = make_loss(model, cfg.loss_scale)
    optimizer = torch.optim.AdamW(model.parameters(), lr=cfg.learning_rate)
    rng = random.Random(cfg.seed)

    best_recall = dev_recall_at_k(model, dev_questions, passages, cfg, k=eval_k)
    logger.info("dev recall@%d before fine-tuning: %.4f", eval_k, best_recall)
    model.save(str(out_dir))

    for epoch in range(1, cfg.epochs + 1):
        model.train()
        shuffled = list(pairs)
        rng.shuffle(shuffled)
        epoch_loss, batches = 0.0, 0
        for start in range(0, len(shuffled), cfg.train_batch_size):
            batch = shuffled[start : start + cfg.train_batch_size]
            if len(batch) < 2:
                continue  # a single pair has no in-batch negatives
            anchors = _features(model, [anchor for anchor, _ in batch])
            positives = _features(model, [positive for _, positive in batch])
            optimizer.zero_grad()
            loss = loss_fn([anchors, positives], labels=None)
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach())
            batches += 1
        model.eval()
        recall = dev_recall_at_k(model, dev_questions, passages, cfg, k=eval_k)
        logger.info(
            "epoch %d/%d: train loss %.4f over %d batches, dev recall@%d %.4f",
            epoch, cfg.epochs, epoch_loss / max(batches, 1), batches, eval_k, recall,
        )
        if recall > best_recall:
            best_recall = recall
            model.save(str(out_dir))
            logger.info("new best checkpoint saved (dev recall@%d %.4f)", eval_k, recall)

    logger.info("best dev recall@%d: %.4f; checkpoint at %s", eval_k, best_recall, out_dir)
    return out_dir
