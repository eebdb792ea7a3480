"""Query strategies: uniform random batches and margin-random active
querying (uniform draw from the C*n_b least-confident points)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import confidence as conf
from . import model as linmod

RANDOM = "random"
MARGIN_RANDOM = "margin_random"


@dataclass
class QueryConfig:
    strategy: str = MARGIN_RANDOM
    batch: int = 25
    C: float = 2.0
    use_gap: bool = False  # top1-top2 logit gap instead of the run's g

    def __post_init__(self):
        if self.strategy == MARGIN_RANDOM and self.C <= 1:
            raise ValueError("C must be > 1 for margin-random querying")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")


def query_random(unlabeled_ids: np.ndarray, n: int,
                 rng: np.random.Generator) -> tuple[np.ndarray, bool]:
    """n distinct ids uniformly without replacement. Asking for more than
    remain returns everything with a truncation flag."""
    ids = np.asarray(unlabeled_ids, dtype=np.int64)
    if n >= len(ids):
        return ids.copy(), n > len(ids)
    chosen = rng.choice(ids, size=n, replace=False)
    return np.sort(chosen), False


def query_margin_random(model, kind, unlabeled_ids: np.ndarray,
                        features: np.ndarray, cfg: QueryConfig,
                        rng: np.random.Generator) -> tuple[np.ndarray, bool]:
    """Sort ascending by confidence, keep the bottom C*n_b slice, sample
    the batch uniformly from it. Ties break on id (stable sort) so
    identical seeds reproduce identical batches."""
    ids = np.asarray(unlabeled_ids, dtype=np.int64)
    n_b = cfg.batch
    if n_b >= len(ids):
        return ids.copy(), n_b > len(ids)
    if cfg.use_gap:
        z = linmod.logits(model, features[ids])
        top2 = np.partition(z, -2, axis=1)[:, -2:]
        scores = top2[:, 1] - top2[:, 0]
    else:
        _, scores = conf.score(kind, model, features[ids])
    order = np.lexsort((ids, scores))  # ascending score, then id
    slice_n = min(int(cfg.C * n_b), len(ids))
    pool_slice = ids[order[:slice_n]]
    chosen = rng.choice(pool_slice, size=n_b, replace=False)
    return np.sort(chosen), False
