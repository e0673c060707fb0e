"""Answer-generation plumbing against a chat-completions endpoint.

Retrieved passages are assembled into a deterministic prompt, sent one
query at a time (batch size 1), and the answers are written incrementally
as JSONL so interrupted runs can resume.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, asdict
from pathlib import Path

import requests

from .corpus import Corpus, Passage, PassageKey, Query
from .ranking import RankedList

logger = logging.getLogger(__name__)

# Bump when the prompt text changes; answer files cite this version.
PROMPT_TEMPLATE_VERSION = "1"

_PROMPT_PREAMBLE = (
    "You are a regulatory compliance assistant. Answer the question using only "
    "the numbered passages below. If the passages do not contain the answer, "
    "say so. Cite the relevant passage numbers in square brackets."
)


class GenerationError(RuntimeError):
    """A completion request failed after exhausting its retries."""


@dataclass
class GenerationConfig:
    endpoint_url: str
    model_name: str
    api_key_env_var: str = "LEXSEM_API_KEY"
    max_contexts: int = 10
    timeout: float = 60.0
    max_retries: int = 3
    temperature: float = 0.0
    retry_backoff: float = 0.5  # seconds; doubles per attempt

    def __post_init__(self) -> None:
        if self.max_contexts < 1:
            raise ValueError("max_contexts must be >= 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass
class AnswerRecord:
    query_id: str
    question: str
    context_keys: list[str]
    answer: str
    model_name: str
    error: str | None = None  # None on success; answer is empty on failure

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "AnswerRecord":
        return cls(**json.loads(line))


def build_prompt(question: str, passages: list[Passage], cfg: GenerationConfig) -> str:
    """Deterministic prompt: preamble, numbered key-prefixed passages, question."""
    if not passages:
        raise ValueError("cannot build a prompt with zero passages")
    if len(passages) > cfg.max_contexts:
        raise ValueError(f"{len(passages)} passages exceed max_contexts {cfg.max_contexts}")
    blocks = [
        f"[{i}] {p.key.canonical()}\n{p.text}" for i, p in enumerate(passages, start=1)
    ]
    return "\n\n".join([_PROMPT_PREAMBLE, *blocks, f"Question: {question}", "Answer:"])


def generate_answer(cfg: GenerationConfig, prompt: str, session: requests.Session | None = None) -> str:
    """Single chat-completion request, retried with exponential backoff."""
    payload = {
        "model": cfg.model_name,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": cfg.temperature,
    }
    headers = {"Content-Type": "application/json"}
    api_key = os.environ.get(cfg.api_key_env_var, "")
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    post = (session or requests).post
    attempts = cfg.max_retries + 1
    last_error: Exception | None = None
    for attempt in range(attempts):
        try:
            response = post(cfg.endpoint_url, json=payload, headers=headers, timeout=cfg.timeout)
            if response.status_code != 200:
                raise GenerationError(f"HTTP {response.status_code}")
            content = response.json()["choices"][0]["message"]["content"]
            if not isinstance(content, str) or not content:
                raise GenerationError("empty or malformed completion")
            return content
        except (requests.RequestException, GenerationError, KeyError, IndexError, ValueError) as exc:
            last_error = exc
            if attempt < attempts - 1:
                delay = cfg.retry_backoff * (2**attempt)
                logger.warning("completion attempt %d failed (%s); retrying in %.1fs", attempt + 1, exc, delay)
                time.sleep(delay)
    raise GenerationError(f"completion failed after {attempts} attempts: {last_error}")


def _existing_answers(path: Path) -> dict[str, AnswerRecord]:
    """Last successful record per query id from a partially written file."""
    answered: dict[str, AnswerRecord] = {}
    if not path.exists():
        return answered
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            record = AnswerRecord.from_json(line)
            if record.error is None and record.answer:
                answered[record.query_id] = record
    return answered


def run_generation(
    queries: list[Query],
    runs: list[RankedList],
    corpus: Corpus,
    cfg: GenerationConfig,
    out_path: str | Path,
    session: requests.Session | None = None,
) -> list[AnswerRecord]:
    """Sequential per-query generation; one AnswerRecord per query, in order.

    All run keys are resolved against the corpus before any request is
    issued. Failures are recorded, not fatal. Queries already answered in
    out_path are skipped; their existing records are returned.
    """
    runs_by_query = {run.query_id: run for run in runs}
    contexts: dict[str, list[Passage]] = {}
    for query in queries:
        run = runs_by_query.get(query.query_id)
        if run is None:
            raise ValueError(f"no run for query {query.query_id}")
        passages = []
        for key, _ in run.entries[: cfg.max_contexts]:
            parsed = PassageKey.from_canonical(key)
            if parsed not in corpus:
                raise ValueError(f"run key {key} for query {query.query_id} not in corpus")
            passages.append(corpus.get(parsed))
        contexts[query.query_id] = passages

    out_path = Path(out_path)
    answered = _existing_answers(out_path)
    records: list[AnswerRecord] = []
    with open(out_path, "a", encoding="utf-8") as out:
        for query in queries:
            existing = answered.get(query.query_id)
            if existing is not None:
                records.append(existing)
                continue
            passages = contexts[query.query_id]
            context_keys = [p.key.canonical() for p in passages]
            if not passages:
                record = AnswerRecord(
                    query.query_id, query.text, [], "", cfg.model_name, error="no retrieved passages"
                )
            else:
                prompt = build_prompt(query.text, passages, cfg)
                try:
                    answer = generate_answer(cfg, prompt, session=session)
                    record = AnswerRecord(query.query_id, query.text, context_keys, answer, cfg.model_name)
                except GenerationError as exc:
                    logger.error("generation failed for query %s: %s", query.query_id, exc)
                    record = AnswerRecord(
                        query.query_id, query.text, context_keys, "", cfg.model_name, error=str(exc)
                    )
            out.write(record.to_json() + "\n")
            out.flush()
            records.append(record)
    return records
