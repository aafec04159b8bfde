"""Deterministic rank bucketing shared by quartile and quintile sorts."""

from __future__ import annotations

import numpy as np


def bucket_sizes(n: int, n_buckets: int) -> list[int]:
    """Sizes of ``n_buckets`` buckets; the remainder goes to the lowest buckets first."""
    base, extra = divmod(n, n_buckets)
    return [base + (1 if b < extra else 0) for b in range(n_buckets)]


def rank_buckets(values, tiebreak, n_buckets: int) -> np.ndarray:
    """Assign 1-based bucket labels by ascending ``values``, ties by ``tiebreak``.

    Labels are returned aligned with the input order.
    """
    values = np.asarray(values, dtype=float)
    tiebreak = np.asarray(tiebreak)
    order = np.lexsort((tiebreak, values))
    labels = np.empty(len(values), dtype=np.int64)
    start = 0
    for b, size in enumerate(bucket_sizes(len(values), n_buckets), start=1):
        labels[order[start:start + size]] = b
        start += size
    return labels
