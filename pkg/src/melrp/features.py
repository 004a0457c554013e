"""Feature families on top of the shared front-end.

Every family starts from one of two per-track base matrices, the ``T x 128``
log-Mel frames or the ``T x 26`` MARSYAS frames.  A :class:`FrameModel` maps
base frames to family frames; PCA and autoencoder models must be fitted on
training tracks, the others are data independent.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import aggregation, projections
from .audio_io import AudioClip, load_audio
from .cache import FeatureCache, content_digest, pipeline_params
from .classifiers.scaling import Scaler, apply_scaler, fit_scaler
from .handcrafted import N_MARSYAS, marsyas_features
from .manifest import DatasetManifest
from .spectral import N_MELS, log_mel

log = logging.getLogger(__name__)

FAMILY_ALIASES = {
    "mel-spec": "MEL-SPEC",
    "mel-rp": "MEL-RP",
    "mel-pca": "MEL-PCA",
    "mel-ae": "MEL-AE",
    "marsyas": "MARSYAS",
}
FITTED_FAMILIES = ("MEL-PCA", "MEL-AE")
SIZED_FAMILIES = ("MEL-RP", "MEL-PCA", "MEL-AE")


def canonical_family(name: str) -> str:
    key = name.strip().lower()
    if key in FAMILY_ALIASES:
        return FAMILY_ALIASES[key]
    if name in aggregation.FAMILIES:
        return name
    raise ValueError(f"unknown feature family {name!r}; expected one of {', '.join(FAMILY_ALIASES)}")


def base_kind(family: str) -> str:
    return "marsyas" if canonical_family(family) == "MARSYAS" else "mel"


def frame_dim(family: str, dim: int | None = None) -> int:
    family = canonical_family(family)
    if family == "MEL-SPEC":
        return N_MELS
    if family == "MARSYAS":
        return N_MARSYAS
    if dim is None or dim < 1:
        raise ValueError(f"{family} needs a positive dimensionality")
    return int(dim)


def base_frames(clip: AudioClip, kind: str) -> np.ndarray:
    if kind == "mel":
        return log_mel(clip)
    if kind == "marsyas":
        return marsyas_features(clip)
    raise ValueError(f"unknown base kind {kind!r}")


@dataclass
class FrameModel:
    family: str
    dim: int
    rp: projections.RandomProjection | None = None
    pca: projections.PcaModel | None = None
    ae: projections.Autoencoder | None = None
    ae_scaler: Scaler | None = None
    ae_log: projections.TrainLog | None = None

    def transform(self, frames: np.ndarray) -> np.ndarray:
        if self.family == "MEL-RP":
            return projections.project(frames, self.rp)
        if self.family == "MEL-PCA":
            return projections.pca_transform(frames, self.pca)
        if self.family == "MEL-AE":
            return projections.encode(apply_scaler(self.ae_scaler, frames), self.ae)
        return np.asarray(frames, dtype=np.float64)


def fit_frame_model(
    family: str,
    dim: int | None,
    train_frames: list[np.ndarray] | None = None,
    seed: int = 0,
    ae_options: dict | None = None,
) -> FrameModel:
    """Build the frame transform for ``family``.

    ``train_frames`` (base frames of the training tracks) is only read for
    MEL-PCA and MEL-AE.  Autoencoder inputs are z-scored with training-frame
    statistics before fitting.
    """
    family = canonical_family(family)
    F = frame_dim(family, dim)
    if family == "MEL-RP":
        return FrameModel(family, F, rp=projections.make_random_projection(seed, F))
    if family not in FITTED_FAMILIES:
        return FrameModel(family, F)
    if not train_frames:
        raise ValueError(f"{family} needs training frames")
    X = np.vstack(train_frames)
    if family == "MEL-PCA":
        return FrameModel(family, F, pca=projections.fit_pca(X, F))
    scaler = fit_scaler(X)
    ae, train_log = projections.train_autoencoder(apply_scaler(scaler, X), F, seed, **(ae_options or {}))
    log.info(
        "autoencoder H=%d stopped at epoch %d (best validation %.4g)",
        F, train_log.stopped_epoch, train_log.best_validation_loss,
    )
    return FrameModel(family, F, ae=ae, ae_scaler=scaler, ae_log=train_log)


def track_vector(frames: np.ndarray, model: FrameModel) -> np.ndarray:
    """Base frames -> ``12F`` track vector for the model's family."""
    return aggregation.aggregate(model.transform(frames))


class TrackError(RuntimeError):
    def __init__(self, track_id: str, cause: Exception):
        self.track_id = track_id
        self.cause = cause
        super().__init__(f"feature extraction failed for track {track_id!r}: {cause}")


@dataclass
class FrameStore:
    """Memoized base frames for the tracks of one manifest.

    Relative manifest paths resolve against ``root``.  ``loader`` turns a
    path into a 44.1 kHz mono clip.  With ``disk_cache`` set, frames are
    persisted (as float32) under a digest of the audio bytes and front-end
    parameters.
    """

    manifest: DatasetManifest
    root: Path | str = "."
    loader: Callable[[Path], AudioClip] = load_audio
    disk_cache: FeatureCache | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def with_manifest(self, manifest: DatasetManifest) -> "FrameStore":
        """Store for a relabeled manifest over the same audio, sharing memoized frames."""
        return FrameStore(manifest, self.root, self.loader, self.disk_cache, self._cache)

    def path_of(self, track_id: str) -> Path:
        p = Path(self.manifest[track_id].path)
        return p if p.is_absolute() else Path(self.root) / p

    def frames(self, track_id: str, kind: str) -> np.ndarray:
        key = (track_id, kind)
        if key not in self._cache:
            try:
                self._cache[key] = self._compute(track_id, kind)
            except Exception as exc:
                raise TrackError(track_id, exc) from exc
        return self._cache[key]

    def _compute(self, track_id: str, kind: str) -> np.ndarray:
        path = self.path_of(track_id)
        if self.disk_cache is None:
            return base_frames(self.loader(path), kind)
        digest = content_digest(path.read_bytes(), pipeline_params(base=kind))
        cached = self.disk_cache.get(digest)
        if cached is None:
            frames = base_frames(self.loader(path), kind)
            cached = self.disk_cache.put(digest, frames, track_id=track_id, base=kind)
        return cached.astype(np.float64)
