"""Evaluation metrics. Stress (1) is the positive class throughout."""

from __future__ import annotations

from typing import Optional

import numpy as np


def confusion_counts(y_true: np.ndarray, y_pred: np.ndarray) -> dict[str, int]:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    return {
        "tp": int(np.sum((y_true == 1) & (y_pred == 1))),
        "fp": int(np.sum((y_true == 0) & (y_pred == 1))),
        "tn": int(np.sum((y_true == 0) & (y_pred == 0))),
        "fn": int(np.sum((y_true == 1) & (y_pred == 0))),
    }


def accuracy(c: dict[str, int]) -> float:
    total = c["tp"] + c["fp"] + c["tn"] + c["fn"]
    return (c["tp"] + c["tn"]) / total if total else 0.0


def precision(c: dict[str, int]) -> float:
    denom = c["tp"] + c["fp"]
    return c["tp"] / denom if denom else 0.0


def recall(c: dict[str, int]) -> float:
    denom = c["tp"] + c["fn"]
    return c["tp"] / denom if denom else 0.0


def f1_score(c: dict[str, int]) -> float:
    p, r = precision(c), recall(c)
    return 2 * p * r / (p + r) if (p + r) else 0.0


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    sv = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auc_score(y_true: np.ndarray, scores: np.ndarray) -> Optional[float]:
    """Rank-based AUC (Mann-Whitney; ties count 0.5). None for one class."""
    y_true = np.asarray(y_true)
    scores = np.asarray(scores, dtype=np.float64)
    n_pos = int(np.sum(y_true == 1))
    n_neg = int(np.sum(y_true == 0))
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = _midranks(scores)
    rank_sum_pos = float(ranks[y_true == 1].sum())
    u = rank_sum_pos - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)
