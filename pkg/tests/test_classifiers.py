import numpy as np
import pytest
from scipy.optimize import minimize

from melrp.classifiers import (
    DEFAULT_C_GRID,
    SvmConvergenceError,
    SvmError,
    apply_scaler,
    fit_scaler,
    grid_search,
    knn_fit,
    knn_predict,
    svm_ovo_predict,
    svm_ovo_train,
    train_svm_binary,
)
from melrp.classifiers.search import GridSearchError, validation_split
from melrp.classifiers.svm import dual_objective, full_alpha
from oracles import blobs, kkt_violation, knn_brute, rbf

# ------------------------------------------------------------ scaler


def test_two_point_scaling():
    s = fit_scaler(np.array([[1.0], [3.0]]))
    np.testing.assert_array_equal(apply_scaler(s, np.array([[1.0], [3.0]])), [[-1.0], [1.0]])


def test_constant_column_and_moments(rng):
    X = rng.normal(loc=5, scale=3, size=(50, 4))
    X[:, 2] = 7.25
    Z = apply_scaler(fit_scaler(X), X)
    assert not Z[:, 2].any()
    keep = [0, 1, 3]
    assert np.all(np.abs(Z[:, keep].mean(axis=0)) < 1e-9)
    assert np.all(np.abs(Z[:, keep].var(axis=0) - 1) < 1e-9)


def test_test_row_uses_train_parameters(rng):
    X = rng.normal(size=(20, 3))
    s = fit_scaler(X)
    np.testing.assert_array_equal(apply_scaler(s, X[4:5]), apply_scaler(s, X)[4:5])


# ------------------------------------------------------------ knn


def test_knn_trivial_cases(rng):
    X = rng.normal(size=(10, 3))
    labels = np.arange(10)
    assert knn_predict(knn_fit(X, labels, 1), X).tolist() == labels.tolist()
    X2 = np.array([[0, 0]] * 3 + [[10, 10]] * 3, dtype=float)
    assert knn_predict(knn_fit(X2, list("aaabbb"), 3), [[1, 1]]).tolist() == ["a"]


def test_knn_vs_brute_force(rng):
    X = rng.normal(size=(100, 4))
    labels = rng.integers(0, 3, 100).tolist()
    Q = rng.normal(size=(20, 4))
    assert knn_predict(knn_fit(X, labels, 5), Q).tolist() == knn_brute(X, labels, Q, 5)


def test_knn_ties():
    # two neighbours at distance 1, one per class: the nearer (lower index on distance tie) wins
    X = np.array([[1.0], [-1.0], [5.0]])
    assert knn_predict(knn_fit(X, ["b", "a", "a"], 2), [[0.0]]).tolist() == ["b"]
    assert knn_predict(knn_fit(X[[1, 0, 2]], ["a", "b", "a"], 2), [[0.0]]).tolist() == ["a"]


def test_knn_k_too_large():
    with pytest.raises(ValueError):
        knn_fit(np.zeros((3, 2)), [0, 1, 0], 4)


def test_knn_grid_on_integer_lattice():
    # many exact distance ties on a lattice; compare with the loop oracle
    X = np.array([[i, j] for i in range(6) for j in range(6)], dtype=float)
    labels = [(i * 7 + j * 3) % 4 for i in range(6) for j in range(6)]
    Q = np.array([[i + 0.5, j] for i in range(5) for j in range(5)], dtype=float)
    for k in (1, 5, 10, 20):
        assert knn_predict(knn_fit(X, labels, k), Q).tolist() == knn_brute(X, labels, Q, k)


# ------------------------------------------------------------ binary svm


def _certify(m, X, y, C, gamma):
    alpha = full_alpha(m, len(y))
    return kkt_violation(alpha, y, rbf(X, X, gamma), m.bias, C, 1e-3)


def test_two_point_problem():
    X = np.array([[-1.0], [1.0]])
    y = np.array([-1.0, 1.0])
    m = train_svm_binary(X, y, C=10, gamma=1)
    assert len(m.support_indices) == 2
    a = np.abs(m.dual_coefficients)
    assert abs(a[0] - a[1]) < 1e-12
    assert m.predict(X).tolist() == [-1.0, 1.0]
    assert _certify(m, X, y, 10, 1) == 0


def test_xor():
    X = np.array([[1, 1], [-1, -1], [1, -1], [-1, 1]], dtype=float)
    y = np.array([1, 1, -1, -1], dtype=float)
    m = train_svm_binary(X, y, C=1000, gamma=1)
    assert np.all(m.predict(X) == y)
    assert _certify(m, X, y, 1000, 1) == 0


def test_single_class_rejected():
    with pytest.raises(SvmError):
        train_svm_binary(np.zeros((3, 2)), np.ones(3), 1.0, 1.0)


def test_iteration_cap_reports_violations():
    X, y = blobs(200, 0)
    with pytest.raises(SvmConvergenceError) as err:
        train_svm_binary(X, y, 1000, 0.5, max_iter=10)
    assert err.value.violations > 0


def test_alpha_bounds(rng):
    X, y = blobs(60, 2)
    for C in (1, 10):
        m = train_svm_binary(X, y, C, 0.5)
        assert np.all(np.abs(m.dual_coefficients) <= C + 1e-12)


def _slsqp_dual(X, y, C, gamma):
    """Independent tight QP solve of the SVM dual."""
    Q = (y[:, None] * y[None]) * rbf(X, X, gamma)
    res = minimize(
        lambda a: 0.5 * a @ Q @ a - a.sum(), np.zeros(len(y)), jac=lambda a: Q @ a - 1, method="SLSQP",
        bounds=[(0, C)] * len(y), constraints=[{"type": "eq", "fun": lambda a: a @ y, "jac": lambda a: y}],
        options={"maxiter": 2000, "ftol": 1e-14},
    )
    return -res.fun


@pytest.mark.slow
@pytest.mark.parametrize("C", DEFAULT_C_GRID)
def test_blob_dual_objective_vs_qp_oracle(C):
    X, y = blobs(200, 0)
    m = train_svm_binary(X, y, C, 0.5)
    assert _certify(m, X, y, C, 0.5) == 0
    ours = dual_objective(full_alpha(m, 200), X, y, 0.5)
    oracle = _slsqp_dual(X, y, C, 0.5)
    assert abs(ours - oracle) <= 1e-2 * abs(oracle)


def test_permutation_invariance():
    X, y = blobs(80, 5)
    perm = np.random.default_rng(0).permutation(80)
    a = train_svm_binary(X, y, 10, 0.5)
    b = train_svm_binary(X[perm], y[perm], 10, 0.5)
    Q = np.random.default_rng(1).normal(size=(30, 2))
    np.testing.assert_allclose(a.decision_function(Q), b.decision_function(Q), rtol=0, atol=1e-6)
    assert sorted(a.support_indices.tolist()) == sorted(perm[b.support_indices].tolist())


# ------------------------------------------------------------ one-vs-one


def test_two_class_ovo_matches_binary():
    X, y = blobs(60, 1)
    labels = np.where(y > 0, "pos", "neg")
    model = svm_ovo_train(X, labels, C=10)
    assert len(model.machines) == 1
    (a, b), m = next(iter(model.machines.items()))
    Q = np.random.default_rng(3).normal(size=(40, 2))
    f = m.decision_function(Q)
    np.testing.assert_array_equal(svm_ovo_predict(model, Q), np.where(f >= 0, a, b))


def test_three_blobs():
    rng = np.random.default_rng(0)
    centers = np.array([[0, 0], [6, 0], [0, 6]])
    X = np.vstack([rng.normal(size=(30, 2)) + c for c in centers])
    labels = np.repeat(["a", "b", "c"], 30)
    model = svm_ovo_train(X, labels, C=10)
    assert len(model.machines) == 3
    assert np.mean(svm_ovo_predict(model, X) == labels) >= 0.99
    for (p, q), m in model.machines.items():
        rows = np.flatnonzero((labels == p) | (labels == q))
        yy = np.where(labels[rows] == p, 1.0, -1.0)
        local = type(m)(m.support_vectors, m.dual_coefficients, m.bias, m.gamma, m.C,
                        np.searchsorted(rows, m.support_indices), m.n_iter)
        assert _certify(local, X[rows], yy, 10, m.gamma) == 0


def test_default_gamma():
    X = np.random.default_rng(0).normal(size=(6, 1200))
    model = svm_ovo_train(X, [0, 1, 0, 1, 0, 1], C=1)
    assert all(m.gamma == 1 / 1200 for m in model.machines.values())


def test_ovo_vote_tie_uses_margin():
    # three classes, each machine votes once: the tie resolves by summed |decision|
    from melrp.classifiers.svm import SvmBinary, SvmOvo

    def const(v):
        return SvmBinary(np.zeros((1, 1)), np.zeros(1), v, 1.0, 1.0, np.array([0]))

    model = SvmOvo(("a", "b", "c"), {("a", "b"): const(0.2), ("a", "c"): const(-0.9), ("b", "c"): const(0.5)})
    # votes: a, c, b -> one each; margins a 0.2, b 0.5, c 0.9
    assert svm_ovo_predict(model, [[0.0]]).tolist() == ["c"]


# ------------------------------------------------------------ grid search


def test_default_grid_and_single_point(rng):
    assert DEFAULT_C_GRID == (1, 10, 1000, 10000)
    X = rng.normal(size=(20, 3))
    assert grid_search(X, [0, 1] * 10, "svm", grid=(10,)).best == 10


def test_grid_prefers_informative_point():
    """Constructed: grid point 'good' sees true labels, 'bad' sees shuffled labels."""
    X, y = blobs(100, 3, separation=8.0)
    labels = np.where(y > 0, "p", "n")
    res = grid_search(X, labels, "knn", grid=(1, 5), seed=0)
    assert res.scores[1] == 1.0 and res.best == 1  # perfect on separated blobs, first wins the tie
    shuffled = labels.copy()
    np.random.default_rng(0).shuffle(shuffled)
    fit, val = validation_split(labels, np.arange(100), 0)
    good = knn_predict(knn_fit(X[fit], labels[fit], 1), X[val])
    bad = knn_predict(knn_fit(X[fit], shuffled[fit], 1), X[val])
    assert np.mean(good == labels[val]) == 1.0
    assert np.mean(bad == labels[val]) < 0.8


def test_validation_split_respects_groups():
    labels = np.array(list("ab") * 20)
    groups = np.repeat(np.arange(10), 4)
    fit, val = validation_split(labels, groups, 0)
    assert not set(groups[fit]) & set(groups[val])
    assert 0.1 <= len(val) / 40 <= 0.3


def test_validation_split_gives_up():
    # the only class-c artist is the largest group, so it is visited first and
    # always lands in validation fold 0 whatever the seed
    labels = np.array(["c", "c", "a", "a", "a", "a"])
    groups = np.array([0, 0, 1, 2, 3, 4])
    with pytest.raises(GridSearchError):
        validation_split(labels, groups, 0)
