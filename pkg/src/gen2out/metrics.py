"""Ranking metrics for anomaly scores (higher score = more anomalous)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata


@dataclass(frozen=True)
class RankingEval:
    ap: float
    roc_auc: float
    n_pos: int
    n_neg: int


def _check(scores, labels):
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape:
        raise ValueError(f"scores and labels differ in length: {scores.size} vs {labels.size}")
    if not np.all((labels == 0) | (labels == 1)):
        raise ValueError("labels must be 0 or 1")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    return scores, labels.astype(bool)


def average_precision(scores, labels) -> float:
    """Mean of precision@rank over the positives, ranking by descending score.

    Tied scores keep their input order (stable sort); no averaging over tie
    permutations is done.
    """
    scores, labels = _check(scores, labels)
    n_pos = int(labels.sum())
    if n_pos == 0:
        raise ValueError("average precision needs at least one positive label")
    order = np.argsort(-scores, kind="stable")
    hits = labels[order]
    ranks = np.flatnonzero(hits) + 1
    return float(np.mean(np.arange(1, n_pos + 1) / ranks))


def roc_auc(scores, labels) -> float:
    """Probability that a random positive outscores a random negative, ties counting 1/2."""
    scores, labels = _check(scores, labels)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC-AUC needs both positive and negative labels")
    ranks = rankdata(scores)  # average ranks handle ties
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def evaluate_ranking(scores, labels) -> RankingEval:
    _, lab = _check(scores, labels)
    return RankingEval(average_precision(scores, labels), roc_auc(scores, labels), int(lab.sum()), int((~lab).sum()))
