from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

DEFAULT_K_GRID = (1, 5, 10, 20)


@dataclass(frozen=True)
class KnnModel:
    train_vectors: np.ndarray
    train_labels: np.ndarray
    k: int

    def __post_init__(self):
        n = np.asarray(self.train_vectors).shape[0]
        if not 1 <= self.k <= n:
            raise ValueError(f"k={self.k} must be between 1 and the training size {n}")


def knn_fit(X, labels, k: int) -> KnnModel:
    return KnnModel(np.asarray(X, dtype=np.float64), np.asarray(labels), k)


def knn_predict(model: KnnModel, queries) -> np.ndarray:
    """Majority vote among the ``k`` nearest training vectors (Euclidean).

    Equal distances resolve to the lower training index; a vote tie goes to
    whichever tied class owns the nearest neighbour.
    """
    Q = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    d = cdist(Q, model.train_vectors, "sqeuclidean")
    order = np.argsort(d, axis=1, kind="stable")[:, : model.k]
    out = []
    for row in order:
        labels = model.train_labels[row]
        votes: dict = {}
        for lab in labels:
            votes[lab] = votes.get(lab, 0) + 1
        top = max(votes.values())
        # labels are in nearest-first order
        out.append(next(lab for lab in labels if votes[lab] == top))
    return np.asarray(out)
