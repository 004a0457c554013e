"""Projection-based frame features over log-Mel frames.

* Gaussian random projection (MEL-RP)
* PCA (MEL-PCA)
* single-hidden-layer ReLU autoencoder, bottleneck activations as features (MEL-AE)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spectral import N_MELS

DEFAULT_DIMS = (8, 26, 51, 75, 100)
DEFAULT_HIDDEN = (16, 32, 64, 128, 256)


def _check_columns(features: np.ndarray, expected: int) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != expected:
        raise ValueError(f"expected a T x {expected} matrix, got shape {features.shape}")
    return features


# ---------------------------------------------------------------- random projection


@dataclass(frozen=True)
class RandomProjection:
    matrix: np.ndarray  # M x input_dim, i.i.d. N(0, 1)
    seed: int
    target_dim: int

    @property
    def input_dim(self) -> int:
        return self.matrix.shape[1]


def make_random_projection(seed: int, target_dim: int, input_dim: int = N_MELS) -> RandomProjection:
    """Draw an unscaled standard-normal ``target_dim x input_dim`` matrix."""
    if target_dim < 1:
        raise ValueError(f"target_dim must be >= 1, got {target_dim}")
    rng = np.random.default_rng(seed)
    matrix = rng.standard_normal((target_dim, input_dim))
    matrix.setflags(write=False)
    return RandomProjection(matrix, seed, target_dim)


def project(features, rp: RandomProjection) -> np.ndarray:
    return _check_columns(features, rp.input_dim) @ rp.matrix.T


# ---------------------------------------------------------------- PCA


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # M x D, orthonormal rows
    eigenvalues: np.ndarray

    @property
    def target_dim(self) -> int:
        return self.components.shape[0]


def fit_pca(train_frames, target_dim: int) -> PcaModel:
    """Top eigenvectors of the sample covariance, largest eigenvalue first.

    Each component is signed so its largest-magnitude entry is positive.
    """
    X = np.asarray(train_frames, dtype=np.float64)
    n, d = X.shape
    if n < target_dim:
        raise ValueError(f"need at least {target_dim} frames for {target_dim} components, got {n}")
    if target_dim > d:
        raise ValueError(f"target_dim {target_dim} exceeds input dimension {d}")
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = Xc.T @ Xc / max(n - 1, 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1][:target_dim]
    evals = np.clip(evals[order], 0.0, None)
    comps = evecs[:, order].T
    pivots = np.argmax(np.abs(comps), axis=1)
    signs = np.sign(comps[np.arange(target_dim), pivots])
    comps = comps * signs[:, None]
    return PcaModel(mean, comps, evals)


def pca_transform(features, model: PcaModel) -> np.ndarray:
    X = _check_columns(features, model.mean.shape[0])
    return (X - model.mean) @ model.components.T


# ---------------------------------------------------------------- autoencoder


class TrainingError(RuntimeError):
    def __init__(self, epoch: int, message: str = "non-finite loss"):
        self.epoch = epoch
        super().__init__(f"autoencoder training diverged at epoch {epoch}: {message}")


@dataclass
class Autoencoder:
    W1: np.ndarray  # H x D
    b1: np.ndarray  # H
    W2: np.ndarray  # D x H
    b2: np.ndarray  # D

    @property
    def hidden(self) -> int:
        return self.W1.shape[0]

    @property
    def input_dim(self) -> int:
        return self.W1.shape[1]

    def params(self) -> dict[str, np.ndarray]:
        return {"W1": self.W1, "b1": self.b1, "W2": self.W2, "b2": self.b2}

    def copy(self) -> "Autoencoder":
        return Autoencoder(self.W1.copy(), self.b1.copy(), self.W2.copy(), self.b2.copy())

    @classmethod
    def zeros(cls, input_dim: int, hidden: int) -> "Autoencoder":
        return cls(
            np.zeros((hidden, input_dim)), np.zeros(hidden), np.zeros((input_dim, hidden)), np.zeros(input_dim)
        )

    @classmethod
    def glorot(cls, input_dim: int, hidden: int, rng: np.random.Generator) -> "Autoencoder":
        limit = math.sqrt(6.0 / (input_dim + hidden))
        W1 = rng.uniform(-limit, limit, size=(hidden, input_dim))
        W2 = rng.uniform(-limit, limit, size=(input_dim, hidden))
        return cls(W1, np.zeros(hidden), W2, np.zeros(input_dim))


@dataclass
class TrainLog:
    epoch_losses: list[float] = field(default_factory=list)
    validation_losses: list[float] = field(default_factory=list)
    stopped_epoch: int = 0
    best_epoch: int = 0
    best_validation_loss: float = math.inf
    n_train: int = 0
    n_validation: int = 0


def encode(features, ae: Autoencoder) -> np.ndarray:
    X = _check_columns(features, ae.input_dim)
    return np.maximum(X @ ae.W1.T + ae.b1, 0.0)


def reconstruct(features, ae: Autoencoder) -> np.ndarray:
    return encode(features, ae) @ ae.W2.T + ae.b2


def reconstruction_loss(ae: Autoencoder, X: np.ndarray) -> float:
    """Mean squared reconstruction error over all frames and dimensions."""
    err = reconstruct(X, ae) - X
    return float(np.einsum("ij,ij->", err, err) / err.size)


def loss_and_gradients(ae: Autoencoder, X: np.ndarray) -> tuple[float, dict[str, np.ndarray]]:
    X = _check_columns(X, ae.input_dim)
    B = X.shape[0]
    Z = X @ ae.W1.T + ae.b1
    A = np.maximum(Z, 0.0)
    E = A @ ae.W2.T + ae.b2 - X
    loss = float(np.einsum("ij,ij->", E, E) / E.size)
    dY = (2.0 / E.size) * E
    dZ = (dY @ ae.W2) * (Z > 0)
    grads = {
        "W1": dZ.T @ X,
        "b1": dZ.sum(axis=0),
        "W2": dY.T @ A,
        "b2": dY.sum(axis=0),
    }
    return loss, grads


def train_autoencoder(
    train_frames,
    hidden: int,
    seed: int,
    *,
    learning_rate: float = 0.01,
    momentum: float = 0.9,
    batch_size: int = 40000,
    max_epochs: int = 200,
    patience: int = 50,
    validation_fraction: float = 0.1,
    max_frames: int = 2_000_000,
    init: Autoencoder | None = None,
) -> tuple[Autoencoder, TrainLog]:
    """Minibatch Nesterov-momentum training on reconstruction MSE.

    A seeded 10% of the frames is held out; training stops after
    ``patience`` epochs without a validation improvement and the
    best-validation parameters are returned.
    """
    X = np.asarray(train_frames, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need a 2-D matrix with at least 2 frames")
    rng = np.random.default_rng(seed)
    if X.shape[0] > max_frames:
        X = X[np.sort(rng.choice(X.shape[0], max_frames, replace=False))]

    n = X.shape[0]
    n_val = min(max(1, int(round(validation_fraction * n))), n - 1)
    order = rng.permutation(n)
    X_val, X_train = X[order[:n_val]], X[order[n_val:]]
    batch = min(batch_size, X_train.shape[0])

    ae = init.copy() if init is not None else Autoencoder.glorot(X.shape[1], hidden, rng)
    if ae.hidden != hidden or ae.input_dim != X.shape[1]:
        raise ValueError("initial autoencoder does not match the requested shape")
    velocity = {k: np.zeros_like(v) for k, v in ae.params().items()}

    log = TrainLog(n_train=X_train.shape[0], n_validation=n_val)
    best = ae.copy()
    stale = 0
    for epoch in range(max_epochs):
        perm = rng.permutation(X_train.shape[0])
        total = 0.0
        for start in range(0, len(perm), batch):
            xb = X_train[perm[start : start + batch]]
            loss, grads = loss_and_gradients(ae, xb)
            if not math.isfinite(loss):
                raise TrainingError(epoch)
            total += loss * xb.shape[0]
            # Nesterov momentum, look-ahead folded into the update
            for name, param in ae.params().items():
                step = -learning_rate * grads[name]
                velocity[name] = momentum * velocity[name] + step
                param += momentum * velocity[name] + step
        val_loss = reconstruction_loss(ae, X_val)
        if not math.isfinite(val_loss):
            raise TrainingError(epoch, "non-finite validation loss")
        log.epoch_losses.append(total / X_train.shape[0])
        log.validation_losses.append(val_loss)
        log.stopped_epoch = epoch
        if val_loss < log.best_validation_loss:
            log.best_validation_loss = val_loss
            log.best_epoch = epoch
            best = ae.copy()
            stale = 0
        else:
            stale += 1
            if stale >= patience:
                break
    return best, log
