"""Binary-classification metrics: accuracy, F1, ROC AUC.

Kept dependency-free on purpose so the test suite can cross-check them
against brute-force reference implementations.
"""

from __future__ import annotations

import numpy as np

from qwalktree.errors import InvalidInputError, UndefinedMetricError


def _check_lengths(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise InvalidInputError(
            f"inputs must be equal-length nonempty vectors, got {a.shape} and {b.shape}"
        )
    return a, b


def accuracy(y_true, y_pred) -> float:
    y_true, y_pred = _check_lengths(y_true, y_pred)
    return float((y_true == y_pred).mean())


def f1_score(y_true, y_pred, positive_class: int = 1) -> float:
    y_true, y_pred = _check_lengths(y_true, y_pred)
    tp = int(((y_true == positive_class) & (y_pred == positive_class)).sum())
    fp = int(((y_true != positive_class) & (y_pred == positive_class)).sum())
    fn = int(((y_true == positive_class) & (y_pred != positive_class)).sum())
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def roc_auc(y_true, scores) -> float:
    """AUC via the Mann-Whitney rank statistic; tied scores count 1/2.

    Raises UndefinedMetricError unless both classes are present.
    """
    y_true, scores = _check_lengths(y_true, scores)
    pos = y_true == 1
    n_pos = int(pos.sum())
    n_neg = y_true.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError(
            "AUC needs both classes in y_true, got only one"
        )
    order = np.argsort(scores, kind="stable")
    sorted_scores = scores[order]
    ranks = np.empty(y_true.size, dtype=np.float64)
    i = 0
    while i < sorted_scores.size:
        j = i
        while j + 1 < sorted_scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0  # midrank, 1-based
        i = j + 1
    rank_sum = float(ranks[pos].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
