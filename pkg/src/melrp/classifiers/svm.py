"""RBF-kernel soft-margin SVM trained by SMO, and one-vs-one multiclass."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.spatial.distance import cdist

DEFAULT_C_GRID = (1, 10, 1000, 10000)
KKT_TOL = 1e-3
MAX_ITER = 10**6
_TAU = 1e-12


class SvmError(ValueError):
    pass


class SvmConvergenceError(RuntimeError):
    def __init__(self, iterations: int, violations: int):
        self.iterations = iterations
        self.violations = violations
        super().__init__(
            f"SMO stopped at the iteration cap ({iterations}) with {violations} KKT violations"
        )


def rbf_kernel(A, B, gamma: float) -> np.ndarray:
    return np.exp(-gamma * cdist(np.atleast_2d(A), np.atleast_2d(B), "sqeuclidean"))


@dataclass(frozen=True)
class SvmBinary:
    support_vectors: np.ndarray
    dual_coefficients: np.ndarray  # alpha_i * y_i
    bias: float
    gamma: float
    C: float
    support_indices: np.ndarray  # rows of the training matrix
    n_iter: int = 0

    def decision_function(self, X) -> np.ndarray:
        if len(self.dual_coefficients) == 0:
            return np.full(np.atleast_2d(X).shape[0], self.bias)
        return rbf_kernel(X, self.support_vectors, self.gamma) @ self.dual_coefficients + self.bias

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_function(X) >= 0, 1, -1)


def _violating_pair(alpha, grad, y, C):
    F = -y * grad
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    i = int(np.flatnonzero(up)[np.argmax(F[up])])
    j = int(np.flatnonzero(low)[np.argmin(F[low])])
    return i, j, F[i] - F[j], F, up, low


def train_svm_binary(
    X, y, C: float, gamma: float, tol: float = KKT_TOL, max_iter: int | None = None, second_order: bool = True
) -> SvmBinary:
    """Solve the soft-margin dual with SMO.

    The first index of each working pair is the maximal KKT violator; the
    second is the partner with the best second-order gain
    (``second_order=False`` falls back to the minimal-violator partner).
    Stops when the KKT gap ``max_up(-y*g) - min_low(-y*g)`` drops below
    ``tol``, which bounds every point's margin violation by ``tol``.

    Rows are solved in a canonical (lexicographic) order, so the returned
    machine does not depend on the order of the training rows.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    if C <= 0 or gamma <= 0:
        raise SvmError(f"C and gamma must be positive (C={C}, gamma={gamma})")
    if set(np.unique(y)) != {-1.0, 1.0}:
        raise SvmError("binary SVM needs both +1 and -1 labels")
    if max_iter is None:
        max_iter = MAX_ITER
    order = np.lexsort(np.column_stack([X, y]).T[::-1])
    X, y = X[order], y[order]

    # Full Gram matrix; cheaper than recomputing rows at these sizes.
    K = rbf_kernel(X, X, gamma)
    Q = K * np.outer(y, y)
    alpha = np.zeros(n)
    grad = -np.ones(n)

    diagK = np.diag(K).copy()
    it = 0
    while True:
        i, j, gap, F, up, low = _violating_pair(alpha, grad, y, C)
        if gap < tol:
            break
        if second_order:
            # j maximizes the guaranteed objective decrease given i
            cand = low & (F < F[i])
            b = F[i] - F[cand]
            a = np.maximum(diagK[i] + diagK[cand] - 2.0 * K[i, cand], _TAU)
            j = int(np.flatnonzero(cand)[np.argmax(b * b / a)])
        if it >= max_iter:
            violations = int(np.sum(up & (F > F[j] + tol)) + np.sum(low & (F < F[i] - tol)))
            raise SvmConvergenceError(it, violations)
        it += 1

        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(Q[i, i] + Q[j, j] + 2 * Q[i, j], _TAU)
            delta = (-grad[i] - grad[j]) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = max(Q[i, i] + Q[j, j] - 2 * Q[i, j], _TAU)
            delta = (grad[i] - grad[j]) / quad
            total = ai + aj
            ai -= delta
            aj += delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
                if aj > C:
                    aj, ai = C, total - C
            else:
                if aj < 0:
                    aj, ai = 0.0, total
                if ai < 0:
                    ai, aj = 0.0, total

        d_i, d_j = ai - alpha[i], aj - alpha[j]
        alpha[i], alpha[j] = ai, aj
        grad += Q[:, i] * d_i + Q[:, j] * d_j

    _, _, _, F, up, low = _violating_pair(alpha, grad, y, C)
    free = (alpha > 0) & (alpha < C)
    if free.any():
        bias = float(F[free].mean())
    else:
        bias = float((F[up].max() + F[low].min()) / 2)

    sv = np.flatnonzero(alpha > 0)
    return SvmBinary(
        support_vectors=X[sv],
        dual_coefficients=alpha[sv] * y[sv],
        bias=bias,
        gamma=float(gamma),
        C=float(C),
        support_indices=order[sv],
        n_iter=it,
    )


def dual_objective(alpha, X, y, gamma: float) -> float:
    """``sum(alpha) - 0.5 * (alpha*y)^T K (alpha*y)`` (to be maximized)."""
    ay = np.asarray(alpha) * np.asarray(y)
    K = rbf_kernel(X, X, gamma)
    return float(np.sum(alpha) - 0.5 * ay @ K @ ay)


def full_alpha(machine: SvmBinary, n: int) -> np.ndarray:
    alpha = np.zeros(n)
    alpha[machine.support_indices] = np.abs(machine.dual_coefficients)
    return alpha


@dataclass(frozen=True)
class SvmOvo:
    classes: tuple
    machines: dict  # (class_a, class_b) -> SvmBinary, class_a is the +1 side

    def decision_votes(self, X) -> tuple[np.ndarray, np.ndarray]:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        index = {c: i for i, c in enumerate(self.classes)}
        votes = np.zeros((X.shape[0], len(self.classes)))
        margin = np.zeros_like(votes)
        for (a, b), m in self.machines.items():
            f = m.decision_function(X)
            winner = np.where(f >= 0, index[a], index[b])
            rows = np.arange(X.shape[0])
            votes[rows, winner] += 1
            margin[rows, winner] += np.abs(f)
        return votes, margin


def svm_ovo_train(X, labels, C: float, gamma: float | None = None, **kwargs) -> SvmOvo:
    """One binary machine per class pair; ``gamma`` defaults to 1 / n_features."""
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    classes = tuple(np.unique(labels).tolist())
    if len(classes) < 2:
        raise SvmError("need at least 2 classes")
    if gamma is None:
        gamma = 1.0 / X.shape[1]
    machines = {}
    for a, b in combinations(classes, 2):
        rows = np.flatnonzero((labels == a) | (labels == b))
        y = np.where(labels[rows] == a, 1.0, -1.0)
        m = train_svm_binary(X[rows], y, C, gamma, **kwargs)
        # report support vectors in terms of the full training matrix
        machines[(a, b)] = SvmBinary(
            m.support_vectors, m.dual_coefficients, m.bias, m.gamma, m.C, rows[m.support_indices], m.n_iter
        )
    return SvmOvo(classes, machines)


def svm_ovo_predict(model: SvmOvo, queries) -> np.ndarray:
    """Majority vote; ties go to the larger summed |decision|, then class order."""
    votes, margin = model.decision_votes(queries)
    out = []
    for v, mg in zip(votes, margin):
        tied = np.flatnonzero(v == v.max())
        best = tied[np.argmax(mg[tied])] if len(tied) > 1 else tied[0]
        out.append(model.classes[best])
    return np.asarray(out)
