"""RankedList: the interchange type between retrieval, fusion, and evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class RankedList:
    """Descending-score candidates with deterministic tie-breaking.

    Invariants: scores non-increasing, equal scores ordered by ascending
    key, no duplicate keys.
    """

    query_id: str
    entries: list[tuple[str, float]] = field(default_factory=list)

    def __post_init__(self) -> None:
        seen = set()
        for i, (key, score) in enumerate(self.entries):
            if key in seen:
                raise ValueError(f"duplicate key in ranked list: {key}")
            seen.add(key)
            if i > 0:
                prev_key, prev_score = self.entries[i - 1]
                if score > prev_score:
                    raise ValueError(
                        f"scores must be non-increasing: {prev_score} then {score} at rank {i + 1}"
                    )
                if score == prev_score and key < prev_key:
                    raise ValueError(
                        f"equal scores must be ordered by ascending key: {prev_key} then {key}"
                    )

    def __len__(self) -> int:
        return len(self.entries)

    def keys(self) -> list[str]:
        return [key for key, _ in self.entries]

    def top(self, k: int) -> "RankedList":
        return RankedList(self.query_id, self.entries[:k])

    @classmethod
    def from_scores(cls, query_id: str, scored: dict[str, float] | list[tuple[str, float]]) -> "RankedList":
        """Sort (key, score) pairs into a valid ranked list."""
        pairs = list(scored.items()) if isinstance(scored, dict) else list(scored)
        pairs.sort(key=lambda kv: (-kv[1], kv[0]))
        return cls(query_id, pairs)
