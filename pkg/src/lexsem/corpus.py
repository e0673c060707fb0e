"""Corpus and question-split loading for regulatory QA collections.

Passages are addressed by (DocumentID, PassageID) pairs; questions carry
optional gold passage annotations that serve as binary relevance labels.
File formats are documented in the README (see also data/sample/).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

logger = logging.getLogger(__name__)

KEY_SEPARATOR = "#"

# Gold-set sizes observed in the released splits run 1..6; anything larger is
# suspicious but not fatal.
_MAX_EXPECTED_GOLD = 6


@dataclass(frozen=True)
class PassageKey:
    """Stable address of one passage: (document id, passage id)."""

    doc_id: str
    passage_id: str

    def __post_init__(self) -> None:
        if not self.doc_id or not self.passage_id:
            raise ValueError("PassageKey components must be non-empty")
        if KEY_SEPARATOR in self.doc_id or KEY_SEPARATOR in self.passage_id:
            raise ValueError(
                f"PassageKey components may not contain {KEY_SEPARATOR!r}: "
                f"({self.doc_id!r}, {self.passage_id!r})"
            )

    def canonical(self) -> str:
        """Canonical string form, injective because '#' is banned in components."""
        return f"{self.doc_id}{KEY_SEPARATOR}{self.passage_id}"

    @classmethod
    def from_canonical(cls, text: str) -> "PassageKey":
        doc_id, sep, passage_id = text.partition(KEY_SEPARATOR)
        if not sep:
            raise ValueError(f"not a canonical passage key (no {KEY_SEPARATOR!r}): {text!r}")
        return cls(doc_id, passage_id)


@dataclass(frozen=True)
class Passage:
    key: PassageKey
    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError(f"passage {self.key.canonical()} has empty text")


@dataclass
class Query:
    query_id: str
    text: str
    gold: frozenset[PassageKey] = frozenset()
    # Opaque contextual group identifier carried by some collections; unused
    # by retrieval.
    group: str | None = None


class Corpus:
    """Immutable ordered passage collection with O(1) key lookup."""

    def __init__(self, passages: list[Passage]):
        key_index: dict[PassageKey, int] = {}
        for i, passage in enumerate(passages):
            if passage.key in key_index:
                raise ValueError(f"duplicate passage key: {passage.key.canonical()}")
            key_index[passage.key] = i
        self.passages: list[Passage] = passages
        self.key_index: dict[PassageKey, int] = key_index

    def __len__(self) -> int:
        return len(self.passages)

    def __iter__(self):
        return iter(self.passages)

    def __contains__(self, key: PassageKey) -> bool:
        return key in self.key_index

    def get(self, key: PassageKey) -> Passage:
        return self.passages[self.key_index[key]]

    def canonical_keys(self) -> list[str]:
        """Canonical key per passage, in corpus (ordinal) order."""
        return [p.key.canonical() for p in self.passages]


def _stringify_id(value, what: str, where: str) -> str:
    """Accept string or integer identifiers; reject everything else."""
    if isinstance(value, bool):
        raise ValueError(f"{where}: {what} must be a string or number, got bool")
    if isinstance(value, str):
        if not value:
            raise ValueError(f"{where}: {what} is empty")
        return value
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    raise ValueError(f"{where}: {what} must be a string or number, got {type(value).__name__}")


def _parse_passage_record(record, where: str) -> Passage:
    if not isinstance(record, dict):
        raise ValueError(f"{where}: expected a JSON object, got {type(record).__name__}")
    if "DocumentID" not in record:
        raise ValueError(f"{where}: missing DocumentID")
    if "PassageID" not in record:
        raise ValueError(f"{where}: missing PassageID")
    doc_id = _stringify_id(record["DocumentID"], "DocumentID", where)
    passage_id = _stringify_id(record["PassageID"], "PassageID", where)
    text = record.get("Passage", record.get("Text"))
    if text is None:
        raise ValueError(f"{where}: missing passage text (Passage or Text field)")
    if not isinstance(text, str) or not text.strip():
        raise ValueError(f"{where}: passage text is empty")
    try:
        key = PassageKey(doc_id, passage_id)
    except ValueError as exc:
        raise ValueError(f"{where}: {exc}") from exc
    return Passage(key, text)


def _document_files(path: Path) -> list[Path]:
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix == ".json" and p.is_file())
        if not files:
            raise ValueError(f"no .json document files in {path}")
        return files
    if path.is_file():
        return [path]
    raise FileNotFoundError(f"corpus path does not exist: {path}")


def load_corpus(path: str | Path) -> Corpus:
    """Load all passages from a document file or a directory of them.

    Order is deterministic: files in sorted name order, passages in file
    order. Each file holds a JSON array of passage records (or a single
    record object).
    """
    passages: list[Passage] = []
    for file in _document_files(Path(path)):
        with open(file, encoding="utf-8") as f:
            data = json.load(f)
        records = data if isinstance(data, list) else [data]
        for i, record in enumerate(records):
            passages.append(_parse_passage_record(record, f"{file}: record {i}"))
    logger.info("loaded %d passages from %s", len(passages), path)
    return Corpus(passages)


def load_queries(path: str | Path, require_gold: bool = False) -> list[Query]:
    """Load one Query per record from a question split file.

    Gold keys come from the record's passage annotations. With require_gold
    set, a record with no annotations is an error (use for labeled splits).
    """
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, list):
        raise ValueError(f"{path}: expected a JSON array of question records")
    queries: list[Query] = []
    for i, record in enumerate(data):
        where = f"{path}: record {i}"
        if not isinstance(record, dict):
            raise ValueError(f"{where}: expected a JSON object")
        if "QuestionID" not in record:
            raise ValueError(f"{where}: missing QuestionID")
        query_id = _stringify_id(record["QuestionID"], "QuestionID", where)
        text = record.get("Question")
        if not isinstance(text, str) or not text.strip():
            raise ValueError(f"{where}: missing or empty Question")
        annotations = record.get("Passages", [])
        if not isinstance(annotations, list):
            raise ValueError(f"{where}: Passages must be a list")
        gold = set()
        for j, ann in enumerate(annotations):
            ann_where = f"{where}: passage annotation {j}"
            if not isinstance(ann, dict) or "DocumentID" not in ann or "PassageID" not in ann:
                raise ValueError(f"{ann_where}: needs DocumentID and PassageID")
            gold.add(
                PassageKey(
                    _stringify_id(ann["DocumentID"], "DocumentID", ann_where),
                    _stringify_id(ann["PassageID"], "PassageID", ann_where),
                )
            )
        if require_gold and not gold:
            raise ValueError(f"{where}: no gold passage annotations")
        if len(gold) > _MAX_EXPECTED_GOLD:
            logger.warning(
                "%s: %d gold passages for query %s (expected at most %d)",
                where, len(gold), query_id, _MAX_EXPECTED_GOLD,
            )
        group = record.get("Group")
        queries.append(Query(query_id, text, frozenset(gold), group=str(group) if group is not None else None))
    logger.info("loaded %d queries from %s", len(queries), path)
    return queries


def split_histogram(queries: list[Query]) -> dict[int, int]:
    """Histogram of gold-set sizes; every query must be labeled."""
    histogram: dict[int, int] = {}
    for q in queries:
        if not q.gold:
            raise ValueError(f"query {q.query_id} has no gold labels")
        histogram[len(q.gold)] = histogram.get(len(q.gold), 0) + 1
    return dict(sorted(histogram.items()))
