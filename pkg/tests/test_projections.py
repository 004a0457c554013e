import numpy as np
import pytest

from melrp.projections import (
    DEFAULT_DIMS,
    Autoencoder,
    RandomProjection,
    TrainingError,
    encode,
    fit_pca,
    loss_and_gradients,
    make_random_projection,
    pca_transform,
    project,
    reconstruction_loss,
    train_autoencoder,
)
from oracles import covariance, finite_difference, jacobi_eigh, jl_distortions


# ------------------------------------------------------------ random projection


def test_rp_deterministic():
    a = make_random_projection(7, 51).matrix
    b = make_random_projection(7, 51).matrix
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, make_random_projection(8, 51).matrix)


@pytest.mark.parametrize("seed", range(5))
def test_rp_entry_statistics(seed):
    m = make_random_projection(seed, 100).matrix
    assert m.shape == (100, 128)
    assert abs(m.mean()) < 4 / np.sqrt(128 * 100)
    assert 0.9 <= m.var() <= 1.1


def test_rp_default_dims_and_bad_m():
    for M in DEFAULT_DIMS:
        assert make_random_projection(0, M).matrix.shape == (M, 128)
    with pytest.raises(ValueError):
        make_random_projection(0, 0)


def test_project_linear_and_trivial(rng):
    rp = make_random_projection(3, 26)
    A, B = rng.normal(size=(5, 128)), rng.normal(size=(5, 128))
    np.testing.assert_allclose(project(2 * A - 0.5 * B, rp), 2 * project(A, rp) - 0.5 * project(B, rp), atol=1e-9)
    assert not project(np.zeros((3, 128)), rp).any()
    ones = RandomProjection(np.ones((1, 128)), seed=-1, target_dim=1)
    assert project(np.ones((1, 128)), ones)[0, 0] == 128.0
    with pytest.raises(ValueError):
        project(np.zeros((2, 100)), rp)


def test_jl_single_seed(rng):
    X = rng.normal(size=(200, 128))
    d = jl_distortions(X, project(X, make_random_projection(0, 100)), 100)
    assert len(d) == 19900
    assert np.median(d) < 0.15
    assert np.mean(d > 0.5) < 0.01


# ------------------------------------------------------------ PCA


def test_pca_matches_jacobi_oracle(rng):
    for _ in range(10):
        X = rng.normal(size=(10, 5)) @ rng.normal(size=(5, 5))
        model = fit_pca(X, 5)
        vals, vecs = jacobi_eigh(covariance(X))
        np.testing.assert_allclose(model.eigenvalues, vals, atol=1e-8)
        for got, want in zip(model.components, vecs):
            assert min(np.abs(got - want).max(), np.abs(got + want).max()) < 1e-6


def test_pca_axis_aligned():
    rng = np.random.default_rng(0)
    X = np.zeros((1000, 128))
    X[:, 0] = rng.normal(scale=2.0, size=1000)
    X[:, 1] = rng.normal(scale=1.0, size=1000)
    model = fit_pca(X, 2)
    assert abs(model.components[0, 0]) > 0.99
    assert abs(model.eigenvalues[0] - 4) < 0.15 * 4


def test_pca_invariants(rng):
    X = rng.normal(size=(300, 128))
    model = fit_pca(X, 26)
    np.testing.assert_allclose(model.components @ model.components.T, np.eye(26), atol=1e-8)
    assert np.all(np.diff(model.eigenvalues) <= 0)
    biggest = np.argmax(np.abs(model.components), axis=1)
    assert np.all(model.components[np.arange(26), biggest] > 0)


def test_pca_full_rank_isometry(rng):
    X = rng.normal(size=(200, 128))
    Y = pca_transform(X, fit_pca(X, 128))
    dX = ((X[:, None] - X[None]) ** 2).sum(-1)
    dY = ((Y[:, None] - Y[None]) ** 2).sum(-1)
    np.testing.assert_allclose(dY, dX, rtol=1e-6, atol=1e-6)


def test_pca_transform_cases(rng):
    X = rng.normal(size=(100, 128))
    model = fit_pca(X, 8)
    assert np.abs(pca_transform(model.mean[None], model)).max() < 1e-12
    e0 = pca_transform((model.mean + model.components[0])[None], model)[0]
    np.testing.assert_allclose(e0, np.eye(8)[0], atol=1e-9)
    Q = rng.normal(size=(4, 128))
    want = np.array([[sum((Q[t, j] - model.mean[j]) * model.components[m, j] for j in range(128)) for m in range(8)]
                     for t in range(4)])
    np.testing.assert_allclose(pca_transform(Q, model), want, atol=1e-9)


def test_pca_errors(rng):
    with pytest.raises(ValueError):
        fit_pca(rng.normal(size=(5, 128)), 8)
    with pytest.raises(ValueError):
        pca_transform(np.zeros((2, 10)), fit_pca(rng.normal(size=(50, 128)), 8))


def test_pca_reconstruction_optimal(rng):
    X = rng.normal(size=(200, 12)) @ rng.normal(size=(12, 12))
    model = fit_pca(X, 4)
    Xc = X - model.mean
    best = np.mean((Xc - Xc @ model.components.T @ model.components) ** 2)
    for _ in range(100):
        Q = np.linalg.qr(rng.normal(size=(12, 12)))[0][:, :4].T
        assert best <= np.mean((Xc - Xc @ Q.T @ Q) ** 2) + 1e-12


# ------------------------------------------------------------ autoencoder


def _max_rel_error(a, b):
    return float(np.max(np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-6)))


def gradient_check_error(seed):
    rng = np.random.default_rng(seed)
    ae = Autoencoder.glorot(6, 4, rng)
    ae.b1[:] = rng.normal(scale=0.1, size=4)
    ae.b2[:] = rng.normal(scale=0.1, size=6)
    X = rng.normal(size=(8, 6))
    _, grads = loss_and_gradients(ae, X)
    worst = 0.0
    for name, param in ae.params().items():
        numeric = finite_difference(lambda: loss_and_gradients(ae, X)[0], param, h=1e-5)
        worst = max(worst, _max_rel_error(grads[name], numeric))
    return worst


@pytest.mark.parametrize("seed", range(5))
def test_gradient_check(seed):
    assert gradient_check_error(seed) < 1e-4


def test_zero_state_gradient(rng):
    X = rng.normal(size=(10, 128))
    loss, grads = loss_and_gradients(Autoencoder.zeros(128, 16), X)
    assert not grads["W2"].any()
    assert not grads["W1"].any()
    assert abs(loss - np.mean(np.sum(X ** 2, axis=1)) / 128) < 1e-12


def test_encode_cases(rng):
    ae = Autoencoder.glorot(128, 16, rng)
    assert not encode(np.zeros((3, 128)), ae).any()
    X = rng.normal(size=(20, 128))
    out = encode(X, ae)
    assert np.all(out >= 0)
    want = np.array([[max(0.0, float(sum(X[t, j] * ae.W1[h, j] for j in range(128)) + ae.b1[h])) for h in range(16)]
                     for t in range(20)])
    np.testing.assert_allclose(out, want, atol=1e-9)
    with pytest.raises(ValueError):
        encode(np.zeros((2, 64)), ae)


def test_divergence_reports_epoch(rng):
    X = rng.normal(size=(100, 16)) * 1e3
    with pytest.raises(TrainingError) as err:
        train_autoencoder(X, 8, seed=0, learning_rate=10.0)
    assert err.value.epoch >= 0


def test_training_log_and_determinism(rng):
    X = rng.normal(size=(400, 16))
    ae1, log1 = train_autoencoder(X, 4, seed=3, max_epochs=30, patience=5)
    ae2, log2 = train_autoencoder(X, 4, seed=3, max_epochs=30, patience=5)
    assert ae1.W1.tobytes() == ae2.W1.tobytes()
    assert log1.stopped_epoch <= 29
    assert log1.stopped_epoch - int(np.argmin(log1.validation_losses)) <= 5
    assert log1.best_validation_loss == min(log1.validation_losses)
    assert log1.n_train + log1.n_validation == 400


def test_frame_cap_subsamples(rng):
    X = rng.normal(size=(500, 8))
    _, log = train_autoencoder(X, 4, seed=0, max_epochs=2, max_frames=100)
    assert log.n_train + log.n_validation == 100


@pytest.mark.slow
def test_rank2_recovery():
    rng = np.random.default_rng(0)
    T = 50000
    dirs = np.linalg.qr(rng.normal(size=(128, 2)))[0].T
    X = rng.normal(scale=8.0, size=(T, 2)) @ dirs
    init = Autoencoder.glorot(128, 16, np.random.default_rng(1))
    ae, log = train_autoencoder(X, 16, seed=0, init=init)
    assert log.stopped_epoch <= 199
    assert reconstruction_loss(ae, X) < 0.01 * reconstruction_loss(init, X)


@pytest.mark.slow
def test_capacity_monotone_rank16():
    rng = np.random.default_rng(0)
    basis = np.linalg.qr(rng.normal(size=(128, 16)))[0].T
    X = rng.normal(size=(4000, 16)) * np.sqrt(128 / 16) @ basis
    losses = [train_autoencoder(X, H, seed=0)[1].best_validation_loss for H in (16, 32, 64)]
    assert losses[0] >= losses[2] and losses[1] >= losses[2]
