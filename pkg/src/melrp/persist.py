"""Save and load fitted models as matrix-file bundles with a JSON sidecar.

Arrays are stored as float32, so reloaded models match the originals to
single precision.  A random projection is rebuilt from its seed instead.
"""

from __future__ import annotations

import numpy as np

from .classifiers.scaling import Scaler
from .classifiers.svm import SvmBinary, SvmOvo
from .matrixio import load_bundle, save_bundle
from .projections import Autoencoder, PcaModel, RandomProjection, TrainLog, make_random_projection


def save_random_projection(prefix, rp: RandomProjection):
    save_bundle(prefix, {}, {"kind": "random_projection", "seed": rp.seed, "target_dim": rp.target_dim,
                             "input_dim": rp.input_dim})


def load_random_projection(prefix) -> RandomProjection:
    _, meta = load_bundle(prefix)
    return make_random_projection(meta["seed"], meta["target_dim"], meta["input_dim"])


def save_pca(prefix, model: PcaModel):
    save_bundle(
        prefix,
        {"mean": model.mean, "components": model.components, "eigenvalues": model.eigenvalues},
        {"kind": "pca", "target_dim": model.target_dim},
    )


def load_pca(prefix) -> PcaModel:
    a, _ = load_bundle(prefix)
    return PcaModel(a["mean"], a["components"], a["eigenvalues"])


def save_autoencoder(prefix, ae: Autoencoder, seed: int | None = None, log: TrainLog | None = None,
                     scaler: Scaler | None = None):
    arrays = dict(ae.params())
    if scaler is not None:
        arrays.update(input_mean=scaler.mean, input_std=scaler.std)
    meta = {"kind": "autoencoder", "hidden": ae.hidden, "seed": seed}
    if log is not None:
        meta["training"] = {
            "stopped_epoch": log.stopped_epoch,
            "best_epoch": log.best_epoch,
            "best_validation_loss": log.best_validation_loss,
            "epoch_losses": log.epoch_losses,
            "validation_losses": log.validation_losses,
        }
    save_bundle(prefix, arrays, meta)


def load_autoencoder(prefix) -> tuple[Autoencoder, Scaler | None, dict]:
    a, meta = load_bundle(prefix)
    ae = Autoencoder(a["W1"], a["b1"], a["W2"], a["b2"])
    scaler = Scaler(a["input_mean"], a["input_std"]) if "input_mean" in a else None
    return ae, scaler, meta


def save_svm(prefix, model: SvmOvo, scaler: Scaler | None = None):
    arrays, pairs = {}, []
    for n, ((a, b), m) in enumerate(model.machines.items()):
        arrays[f"sv{n}"] = m.support_vectors
        arrays[f"coef{n}"] = m.dual_coefficients
        pairs.append({"classes": [a, b], "bias": m.bias, "gamma": m.gamma, "C": m.C,
                      "support_indices": [int(i) for i in m.support_indices]})
    meta = {"kind": "svm_ovo", "classes": list(model.classes), "pairs": pairs}
    if scaler is not None:
        meta["scaler"] = {"mean": scaler.mean.tolist(), "std": scaler.std.tolist()}
    save_bundle(prefix, arrays, meta)


def load_svm(prefix) -> tuple[SvmOvo, Scaler | None]:
    a, meta = load_bundle(prefix)
    machines = {}
    for n, p in enumerate(meta["pairs"]):
        machines[tuple(p["classes"])] = SvmBinary(
            a[f"sv{n}"], a[f"coef{n}"], p["bias"], p["gamma"], p["C"], np.asarray(p["support_indices"])
        )
    scaler = None
    if "scaler" in meta:
        scaler = Scaler(np.asarray(meta["scaler"]["mean"]), np.asarray(meta["scaler"]["std"]))
    return SvmOvo(tuple(meta["classes"]), machines), scaler
