import numpy as np
import pytest

from qwalktree.errors import InvalidInputError, UndefinedMetricError
from qwalktree.metrics import accuracy, f1_score, roc_auc


def brute_force_metrics(y_true, y_pred):
    """Confusion-matrix reference for accuracy and F1."""
    tp = sum(1 for t, p in zip(y_true, y_pred) if t == 1 and p == 1)
    tn = sum(1 for t, p in zip(y_true, y_pred) if t == 0 and p == 0)
    fp = sum(1 for t, p in zip(y_true, y_pred) if t == 0 and p == 1)
    fn = sum(1 for t, p in zip(y_true, y_pred) if t == 1 and p == 0)
    acc = (tp + tn) / len(y_true)
    prec = tp / (tp + fp) if tp + fp else 0.0
    rec = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
    return acc, f1


def brute_force_auc(y_true, scores):
    """All positive/negative pairs; ties count one half."""
    total = 0.0
    pairs = 0
    for ti, si in zip(y_true, scores):
        if ti != 1:
            continue
        for tj, sj in zip(y_true, scores):
            if tj != 0:
                continue
            pairs += 1
            if si > sj:
                total += 1.0
            elif si == sj:
                total += 0.5
    return total / pairs


def test_perfect_predictions():
    y = [1, 0, 1, 0]
    assert accuracy(y, y) == 1.0
    assert f1_score(y, y) == 1.0
    assert roc_auc(y, [0.9, 0.1, 0.8, 0.2]) == 1.0


def test_all_equal_scores_give_half_auc():
    assert roc_auc([1, 0, 1, 0], [0.3, 0.3, 0.3, 0.3]) == 0.5


def test_auc_hand_example():
    assert roc_auc([1, 1, 0, 0], [0.9, 0.4, 0.6, 0.2]) == 0.75


def test_f1_zero_when_no_positive_predictions():
    assert f1_score([1, 1, 0], [0, 0, 0]) == 0.0


def test_auc_undefined_for_single_class():
    with pytest.raises(UndefinedMetricError):
        roc_auc([1, 1, 1], [0.2, 0.3, 0.4])


def test_length_mismatch_rejected():
    with pytest.raises(InvalidInputError):
        accuracy([1, 0], [1])
    with pytest.raises(InvalidInputError):
        roc_auc([], [])


def test_metrics_match_brute_force_references():
    rng = np.random.default_rng(59)
    for _ in range(1000):
        n = int(rng.integers(2, 60))
        y_true = rng.integers(0, 2, n)
        if y_true.min() == y_true.max():
            y_true[rng.integers(0, n)] = 1 - y_true[0]
        y_pred = rng.integers(0, 2, n)
        # quantized scores so ties actually occur
        scores = rng.integers(0, 8, n) / 7.0

        ref_acc, ref_f1 = brute_force_metrics(y_true, y_pred)
        assert abs(accuracy(y_true, y_pred) - ref_acc) < 1e-12
        assert abs(f1_score(y_true, y_pred) - ref_f1) < 1e-12
        assert abs(roc_auc(y_true, scores) - brute_force_auc(y_true, scores)) < 1e-12
