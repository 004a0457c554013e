from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STD_FLOOR = 1e-12


@dataclass(frozen=True)
class Scaler:
    mean: np.ndarray
    std: np.ndarray

    def transform(self, X) -> np.ndarray:
        return apply_scaler(self, X)


def fit_scaler(train) -> Scaler:
    """Per-column z-score parameters; near-constant columns get std 1."""
    X = np.asarray(train, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("need an n x D matrix with n >= 1")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    flat = std < STD_FLOOR
    std = np.where(flat, 1.0, std)
    # the column mean of a constant column can be off by an ulp
    mean = np.where(flat, X[0], mean)
    return Scaler(mean, std)


def apply_scaler(scaler: Scaler, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return (X - scaler.mean) / scaler.std
