"""Auto-labeling threshold estimation from validation data.

Candidates are the distinct confidence scores observed on the unlabeled pool,
filtered to those with enough validation support; the chosen threshold is the
smallest candidate whose estimated validation error plus an upper-confidence
inflation stays under the target. When no candidate qualifies the threshold
is +inf (abstain everywhere). Runs either as a single global threshold or
independently per predicted class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

STDERR = "stderr"
HOEFFDING = "hoeffding"
ZERO = "zero"  # test-only: isolates the candidate scan from the inflation term


@dataclass
class ThresholdConfig:
    epsilon_a: float = 0.01
    n0: int = 25
    sigma_kind: str = STDERR
    delta: float = 0.05  # used by the hoeffding inflation only
    per_class: bool = True

    def __post_init__(self):
        if not 0 < self.epsilon_a < 1:
            raise ValueError("epsilon_a must be in (0, 1)")
        if self.n0 < 1:
            raise ValueError("n0 must be >= 1")


@dataclass
class ThresholdDecision:
    thresholds: dict  # class -> t_hat (math.inf when nothing qualifies)
    support: dict  # class -> validation count at the chosen threshold
    est_error: dict  # class -> empirical validation error at the threshold
    chosen_sigma: dict  # class -> inflation applied at the threshold
    infinite: dict  # class -> bool
    empty_validation: bool = False

    def threshold_for(self, c: int) -> float:
        return self.thresholds.get(c, math.inf)


def sigma(est_error: float, n_t: int, kind: str, delta: float = 0.05) -> float:
    """Upper-confidence inflation added to the estimated error."""
    if n_t == 0:
        return math.inf
    if kind == STDERR:
        return math.sqrt(est_error * (1.0 - est_error) / n_t)
    if kind == HOEFFDING:
        return math.sqrt(math.log(2.0 / delta) / (2.0 * n_t))
    if kind == ZERO:
        return 0.0
    raise ValueError(f"unknown sigma kind {kind!r}")


def _estimate_single(unlabeled_scores: np.ndarray,
                     val_scores: np.ndarray,
                     val_correct: np.ndarray,
                     cfg: ThresholdConfig) -> tuple[float, int, float, float]:
    """One candidate scan. Returns (t_hat, support, est_error, sigma_hat);
    t_hat is inf when no candidate qualifies."""
    candidates = np.unique(unlabeled_scores)[::-1]  # descending
    if len(val_scores):
        order = np.argsort(-val_scores, kind="stable")
        v_scores = val_scores[order]
        wrong_cum = np.cumsum(~val_correct[order].astype(bool))
    else:
        v_scores = np.empty(0)
        wrong_cum = np.empty(0, dtype=np.int64)

    best = (math.inf, 0, 0.0, 0.0)
    j = 0  # validation points with score >= current candidate
    for t in candidates:
        while j < len(v_scores) and v_scores[j] >= t:
            j += 1
        if j < cfg.n0:
            continue
        wrong = int(wrong_cum[j - 1]) if j else 0
        e_hat = wrong / j
        s_hat = sigma(e_hat, j, cfg.sigma_kind, cfg.delta)
        if e_hat + s_hat <= cfg.epsilon_a:
            # keep scanning: lower candidates may also qualify and win (min t)
            best = (float(t), j, e_hat, s_hat)
    return best


def estimate_threshold(unlabeled_scores: np.ndarray,
                       unlabeled_preds: np.ndarray,
                       val_scores: np.ndarray,
                       val_preds: np.ndarray,
                       val_correct: np.ndarray,
                       cfg: ThresholdConfig,
                       num_classes: int = 2) -> ThresholdDecision:
    """Estimate the threshold(s) for the current model.

    `val_correct[i]` is whether the model's prediction matches the i-th
    validation label. With per_class set, each predicted class gets its own
    scan over class-partitioned scores.
    """
    unlabeled_scores = np.asarray(unlabeled_scores, dtype=np.float64)
    unlabeled_preds = np.asarray(unlabeled_preds, dtype=np.int64)
    val_scores = np.asarray(val_scores, dtype=np.float64)
    val_preds = np.asarray(val_preds, dtype=np.int64)
    val_correct = np.asarray(val_correct, dtype=bool)
    if not np.all(np.isfinite(unlabeled_scores)):
        raise ValueError("unlabeled scores must be finite")

    classes = range(num_classes) if cfg.per_class else [None]
    thresholds, support, est_error, chosen_sigma, infinite = {}, {}, {}, {}, {}
    empty_val = len(val_scores) == 0
    for c in classes:
        if c is None:
            u_mask = np.ones(len(unlabeled_scores), dtype=bool)
            v_mask = np.ones(len(val_scores), dtype=bool)
        else:
            u_mask = unlabeled_preds == c
            v_mask = val_preds == c
        if empty_val or not u_mask.any():
            t, n_t, e, s = math.inf, 0, 0.0, 0.0
        else:
            t, n_t, e, s = _estimate_single(unlabeled_scores[u_mask],
                                            val_scores[v_mask],
                                            val_correct[v_mask], cfg)
        key = c if c is not None else -1
        thresholds[key] = t
        support[key] = n_t
        est_error[key] = e
        chosen_sigma[key] = s
        infinite[key] = not math.isfinite(t)
    if not cfg.per_class:
        # one global threshold applies to every class
        t = thresholds[-1]
        for c in range(num_classes):
            thresholds[c] = t
            support[c] = support[-1]
            est_error[c] = est_error[-1]
            chosen_sigma[c] = chosen_sigma[-1]
            infinite[c] = infinite[-1]
    return ThresholdDecision(thresholds, support, est_error, chosen_sigma,
                             infinite, empty_validation=empty_val)
