"""Loaders for the corpus / question JSON formats and training-pair assembly."""

from __future__ import annotations

import json
import logging
from pathlib import Path

logger = logging.getLogger(__name__)


def _stringify(value, what: str, where: str) -> str:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ValueError(f"{where}: {what} must be a string or integer")
    text = str(value)
    if not text:
        raise ValueError(f"{where}: {what} is empty")
    return text


def _record_key(record: dict, where: str) -> str:
    doc_id = _stringify(record.get("DocumentID"), "DocumentID", where)
    passage_id = _stringify(record.get("PassageID"), "PassageID", where)
    if "#" in doc_id or "#" in passage_id:
        raise ValueError(f"{where}: identifiers may not contain '#'")
    return f"{doc_id}#{passage_id}"


def load_passages(path: str | Path) -> list[tuple[str, str]]:
    """(canonical key, text) pairs in deterministic corpus order."""
    path = Path(path)
    files = sorted(p for p in path.iterdir() if p.suffix == ".json") if path.is_dir() else [path]
    passages: list[tuple[str, str]] = []
    seen: set[str] = set()
    for file in files:
        with open(file, encoding="utf-8") as f:
            data = json.load(f)
        records = data if isinstance(data, list) else [data]
        for i, record in enumerate(records):
            where = f"{file}: record {i}"
            key = _record_key(record, where)
            text = record.get("Passage", record.get("Text"))
            if not isinstance(text, str) or not text.strip():
                raise ValueError(f"{where}: missing passage text")
            if key in seen:
                raise ValueError(f"{where}: duplicate passage key {key}")
            seen.add(key)
            passages.append((key, text))
    return passages


def load_questions(path: str | Path, require_gold: bool = False) -> list[dict]:
    """Question records as {"query_id", "text", "gold": [keys]}."""
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    questions = []
    for i, record in enumerate(data):
        where = f"{path}: record {i}"
        query_id = _stringify(record.get("QuestionID"), "QuestionID", where)
        text = record.get("Question")
        if not isinstance(text, str) or not text.strip():
            raise ValueError(f"{where}: missing Question")
        gold = sorted({_record_key(ann, where) for ann in record.get("Passages", [])})
        if require_gold and not gold:
            raise ValueError(f"{where}: no gold passage annotations")
        questions.append({"query_id": query_id, "text": text, "gold": gold})
    return questions


def build_pairs(questions: list[dict], passages: list[tuple[str, str]]) -> list[tuple[str, str]]:
    """One (question, gold passage text) anchor-positive pair per gold key."""
    text_by_key = dict(passages)
    pairs = []
    for question in questions:
        for key in question["gold"]:
            passage_text = text_by_key.get(key)
            if passage_text is None:
                raise ValueError(f"gold key {key} of query {question['query_id']} not in corpus")
            pairs.append((question["text"], passage_text))
    logger.info("built %d anchor-positive pairs from %d questions", len(pairs), len(questions))
    return pairs
