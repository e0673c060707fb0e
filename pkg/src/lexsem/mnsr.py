"""Multiple-negatives symmetric ranking loss, value only.

Given an n x n anchor-positive similarity matrix, every off-diagonal entry
acts as an in-batch negative, and the cross-entropy is averaged over both
directions (anchor -> positive and positive -> anchor). This module exists
as a parity oracle for the training bridge; it computes no gradients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_SCALE = 20.0


@dataclass
class SimilarityBatch:
    """Square similarity matrix with a softmax temperature multiplier."""

    sims: np.ndarray
    scale: float = DEFAULT_SCALE

    def __post_init__(self) -> None:
        self.sims = np.asarray(self.sims, dtype=np.float64)
        if self.sims.ndim != 2 or self.sims.shape[0] != self.sims.shape[1]:
            raise ValueError(f"similarity matrix must be square, got shape {self.sims.shape}")
        if self.sims.shape[0] < 1:
            raise ValueError("batch size must be >= 1")
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    @property
    def n(self) -> int:
        return self.sims.shape[0]


def _logsumexp(z: np.ndarray, axis: int) -> np.ndarray:
    m = z.max(axis=axis)
    return m + np.log(np.exp(z - np.expand_dims(m, axis)).sum(axis=axis))


def mnsr_loss(batch: SimilarityBatch) -> float:
    """Halved sum of mean row-wise and mean column-wise cross-entropy.

    Targets are the diagonal; rows give the anchor -> positive direction,
    columns the reverse. Always >= 0.
    """
    z = batch.scale * batch.sims
    diag = np.diagonal(z)
    row_ce = _logsumexp(z, axis=1) - diag
    col_ce = _logsumexp(z, axis=0) - diag
    return 0.5 * (float(row_ce.mean()) + float(col_ce.mean()))
