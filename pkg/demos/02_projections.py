"""Three ways to shrink a 128-band log-mel frame.

Random projection needs no data, PCA needs the frames, and the
autoencoder needs the frames plus training.  The pairwise-distance check
at the end is the property random projection relies on.
"""

import numpy as np

from melrp.projections import (
    fit_pca,
    make_random_projection,
    pca_transform,
    project,
    reconstruction_loss,
    train_autoencoder,
)

rng = np.random.default_rng(2024)  # not 0: that stream would reproduce the seed-0 projection matrix

# %% random projection: a fixed N(0, 1) matrix from a seed
rp = make_random_projection(seed=0, target_dim=100)
print("RP matrix", rp.matrix.shape, "mean", rp.matrix.mean().round(4), "var", rp.matrix.var().round(3))

# %% distances survive the projection once rescaled by 1/sqrt(M)
X = rng.normal(size=(200, 128))
Y = project(X, rp) / np.sqrt(100)
i, j = np.triu_indices(200, 1)
dx = np.linalg.norm(X[i] - X[j], axis=1)
dy = np.linalg.norm(Y[i] - Y[j], axis=1)
distortion = np.abs(dy ** 2 / dx ** 2 - 1)
print("pairs:", len(distortion), "median distortion", np.median(distortion).round(3),
      "fraction > 0.5:", np.mean(distortion > 0.5))

# %% PCA on data that really lives in 8 dimensions
basis = np.linalg.qr(rng.normal(size=(128, 8)))[0].T
low = rng.normal(size=(2000, 8)) * np.arange(8, 0, -1) @ basis
pca = fit_pca(low, 12)
print("eigenvalues:", pca.eigenvalues.round(2))
print("components orthonormal:", np.allclose(pca.components @ pca.components.T, np.eye(12)))
print("transformed:", pca_transform(low, pca).shape)

# %% a small ReLU autoencoder on the same data
frames = low[:1500] / low.std()
ae, log = train_autoencoder(frames, 16, seed=0, max_epochs=100, patience=10)
print("epochs", log.stopped_epoch + 1, "best validation loss", round(log.best_validation_loss, 4))
print("reconstruction loss", round(reconstruction_loss(ae, frames), 4))
