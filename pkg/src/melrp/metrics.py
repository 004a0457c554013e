from __future__ import annotations

from collections import Counter

import numpy as np


def per_class_f1(true_labels, predicted_labels) -> dict:
    """F1 for every class present in ``true_labels`` (0/0 counts as 0)."""
    y = list(true_labels)
    p = list(predicted_labels)
    if len(y) != len(p):
        raise ValueError(f"length mismatch: {len(y)} true vs {len(p)} predicted labels")
    if not y:
        raise ValueError("need at least one label")
    support = Counter(y)
    predicted = Counter(p)
    hits = Counter(a for a, b in zip(y, p) if a == b)
    scores = {}
    for c in sorted(support, key=str):
        tp = hits[c]
        precision = tp / predicted[c] if predicted[c] else 0.0
        recall = tp / support[c]
        scores[c] = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return scores


def weighted_f1(true_labels, predicted_labels) -> float:
    """Support-weighted mean of per-class F1."""
    y = list(true_labels)
    scores = per_class_f1(y, predicted_labels)
    support = Counter(y)
    return float(sum(support[c] * f for c, f in scores.items()) / len(y))


def mean_std(scores) -> tuple[float, float]:
    """Arithmetic mean and population standard deviation."""
    a = np.asarray(list(scores), dtype=np.float64)
    return float(a.mean()), float(a.std())
