"""80-20 hyperparameter selection and a uniform fit/predict front for both classifiers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..folds import group_stratified_folds
from ..metrics import weighted_f1
from .knn import DEFAULT_K_GRID, knn_fit, knn_predict
from .scaling import apply_scaler, fit_scaler
from .svm import DEFAULT_C_GRID, svm_ovo_predict, svm_ovo_train

CLASSIFIERS = ("svm", "knn")
DEFAULT_GRIDS = {"svm": DEFAULT_C_GRID, "knn": DEFAULT_K_GRID}
VALIDATION_SPLITS = 5  # one fold of five = 20%
MAX_SPLIT_RETRIES = 10


class GridSearchError(RuntimeError):
    pass


def fit_classifier(kind: str, param, X, labels):
    """Train ``kind`` with its grid parameter (C for svm, k for knn)."""
    if kind == "svm":
        return svm_ovo_train(X, labels, C=float(param), gamma=1.0 / np.asarray(X).shape[1])
    if kind == "knn":
        return knn_fit(X, labels, int(param))
    raise ValueError(f"unknown classifier {kind!r}")


def predict(model, X) -> np.ndarray:
    if hasattr(model, "machines"):
        return svm_ovo_predict(model, X)
    return knn_predict(model, X)


@dataclass
class GridResult:
    best: object
    scores: dict = field(default_factory=dict)
    validation_indices: np.ndarray | None = None
    attempts: int = 1


def validation_split(labels, groups, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Stratified group split: ~80% fit rows, ~20% validation rows.

    Retries with successive seeds until every class appears in the fit part.
    """
    labels = np.asarray(labels)
    classes = set(labels.tolist())
    for attempt in range(MAX_SPLIT_RETRIES + 1):
        folds = group_stratified_folds(labels, groups, VALIDATION_SPLITS, seed + attempt)
        val = np.flatnonzero(folds == 0)
        fit = np.flatnonzero(folds != 0)
        if set(labels[fit].tolist()) == classes:
            return fit, val
    raise GridSearchError(
        f"no 80-20 split kept every class in the fit part after {MAX_SPLIT_RETRIES} retries"
    )


def grid_search(train_vectors, train_labels, classifier_kind: str, grid=None, seed: int = 0, groups=None) -> GridResult:
    """Pick the grid point with the best validation weighted F1 (first wins ties).

    ``groups`` (artist ids) keep each artist on one side of the split; by
    default every row is its own group.  Features are z-scored with
    statistics from the fit part only.
    """
    if classifier_kind not in CLASSIFIERS:
        raise ValueError(f"unknown classifier {classifier_kind!r}")
    grid = tuple(DEFAULT_GRIDS[classifier_kind] if grid is None else grid)
    if not grid:
        raise ValueError("grid must not be empty")
    X = np.asarray(train_vectors, dtype=np.float64)
    y = np.asarray(train_labels)
    if len(grid) == 1:
        return GridResult(grid[0], {grid[0]: None})
    if groups is None:
        groups = np.arange(len(y))

    fit_rows, val_rows = validation_split(y, groups, seed)
    scaler = fit_scaler(X[fit_rows])
    X_fit, X_val = apply_scaler(scaler, X[fit_rows]), apply_scaler(scaler, X[val_rows])

    scores = {}
    for param in grid:
        if classifier_kind == "knn" and int(param) > len(fit_rows):
            scores[param] = -np.inf
            continue
        model = fit_classifier(classifier_kind, param, X_fit, y[fit_rows])
        scores[param] = weighted_f1(y[val_rows], predict(model, X_val))
    best = max(grid, key=lambda p: (scores[p], -grid.index(p)))
    return GridResult(best, scores, val_rows)
