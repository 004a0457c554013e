"""Experiment harness: folds, fitting, scoring, transfer protocol."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .classifiers import apply_scaler, fit_classifier, fit_scaler, grid_search, predict
from .classifiers.search import CLASSIFIERS, DEFAULT_GRIDS
from .features import (
    FITTED_FAMILIES,
    FrameModel,
    FrameStore,
    base_kind,
    canonical_family,
    fit_frame_model,
    frame_dim,
    track_vector,
)
from .folds import FoldAssignment, make_artist_folds, predefined_split
from .manifest import DatasetManifest
from .metrics import mean_std, per_class_f1, weighted_f1

PREDEFINED = "predefined"


class LeakageError(AssertionError):
    pass


@dataclass(frozen=True)
class AuditEntry:
    experiment: str
    fold: int
    fit: str
    consumed: frozenset
    test_ids: frozenset

    @property
    def leaked(self) -> frozenset:
        return self.consumed & self.test_ids


@dataclass
class AuditLog:
    """Append-only record of which track IDs each fitted object consumed."""

    entries: list = field(default_factory=list)

    def record(self, experiment: str, fold: int, fit: str, consumed, test_ids) -> AuditEntry:
        entry = AuditEntry(experiment, fold, fit, frozenset(consumed), frozenset(test_ids))
        self.entries.append(entry)
        if entry.leaked:
            raise LeakageError(
                f"{experiment} fold {fold}: {fit} consumed test tracks {sorted(entry.leaked)[:5]}"
            )
        return entry

    def violations(self) -> list[AuditEntry]:
        return [e for e in self.entries if e.leaked]


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetManifest
    family: str
    dim: int | None = None
    classifier: str = "svm"
    folds: int | str = 10
    seed: int = 0
    grid: tuple | None = None
    ae_options: dict = field(default_factory=dict, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "family", canonical_family(self.family))
        if self.classifier not in CLASSIFIERS:
            raise ValueError(f"unknown classifier {self.classifier!r}")
        if self.folds != PREDEFINED and (not isinstance(self.folds, int) or self.folds < 2):
            raise ValueError(f"folds must be an integer >= 2 or {PREDEFINED!r}, got {self.folds!r}")
        frame_dim(self.family, self.dim)

    @property
    def label(self) -> str:
        dim = "" if self.dim is None else f"-{self.dim}"
        return f"{self.dataset.name}/{self.family}{dim}/{self.classifier}"

    def echo(self) -> dict:
        return {
            "dataset": self.dataset.name,
            "family": self.family,
            "dim": self.dim,
            "classifier": self.classifier,
            "folds": self.folds,
            "seed": self.seed,
            "grid": list(self.grid or DEFAULT_GRIDS[self.classifier]),
        }


@dataclass
class ExperimentResult:
    config: dict
    per_fold: list
    mean: float
    std: float
    per_class: dict
    hyperparameters: list
    timings: dict
    feature_dim: int

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_jsonable)
        if path is not None:
            Path(path).write_text(text + "\n", encoding="utf-8")
        return text

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentResult":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__})


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def assign_folds(config: ExperimentConfig) -> FoldAssignment:
    if config.folds == PREDEFINED:
        return predefined_split(config.dataset)
    return make_artist_folds(config.dataset, config.folds, config.seed)


def permuted_labels(manifest: DatasetManifest, seed: int) -> DatasetManifest:
    """Same tracks, genre column shuffled (a null-hypothesis control)."""
    genres = [t.genre for t in manifest.tracks]
    order = np.random.default_rng(seed).permutation(len(genres))
    return manifest.relabel([genres[i] for i in order])


def run_experiment(
    config: ExperimentConfig,
    store: FrameStore | None = None,
    audit: AuditLog | None = None,
    frame_model: FrameModel | None = None,
    folds: FoldAssignment | None = None,
) -> ExperimentResult:
    """Cross-validated weighted F1 of one family/dimension/classifier setting.

    Per fold, every fitted object (PCA or autoencoder, scaler, grid choice,
    final classifier) sees training tracks only; this is checked through
    ``audit``.  A pre-trained ``frame_model`` (transfer setting) replaces the
    per-fold frame fit.
    """
    manifest = config.dataset
    store = store or FrameStore(manifest)
    audit = audit if audit is not None else AuditLog()
    folds = folds or assign_folds(config)
    kind = base_kind(config.family)
    genre = {t.track_id: t.genre for t in manifest.tracks}
    artist = {t.track_id: t.artist for t in manifest.tracks}
    timings = {"frames": 0.0, "frame_model": 0.0, "vectors": 0.0, "classifier": 0.0}

    def frames_of(ids):
        t0 = time.perf_counter()
        out = [store.frames(t, kind) for t in ids]
        timings["frames"] += time.perf_counter() - t0
        return out

    shared_model = frame_model
    if shared_model is None and config.family not in FITTED_FAMILIES:
        shared_model = fit_frame_model(config.family, config.dim, seed=config.seed)
    shared_vectors: dict = {}

    per_fold, hyper, class_scores = [], [], {}
    for fold in folds.evaluated_folds:
        train_ids = folds.train_ids(fold)
        test_ids = folds.test_ids(fold)

        if shared_model is None:
            t0 = time.perf_counter()
            model = fit_frame_model(
                config.family, config.dim, frames_of(train_ids), seed=config.seed, ae_options=config.ae_options
            )
            timings["frame_model"] += time.perf_counter() - t0
            audit.record(config.label, fold, f"{config.family} frame model", train_ids, test_ids)
            vectors = {}
        else:
            model = shared_model
            vectors = shared_vectors

        t0 = time.perf_counter()
        for tid, frames in zip(train_ids + test_ids, frames_of(train_ids + test_ids)):
            if tid not in vectors:
                vectors[tid] = track_vector(frames, model)
        timings["vectors"] += time.perf_counter() - t0

        t0 = time.perf_counter()
        X_train = np.vstack([vectors[t] for t in train_ids])
        y_train = np.array([genre[t] for t in train_ids])
        X_test = np.vstack([vectors[t] for t in test_ids])
        y_test = [genre[t] for t in test_ids]

        search = grid_search(
            X_train, y_train, config.classifier, config.grid, seed=config.seed + fold,
            groups=[artist[t] for t in train_ids],
        )
        audit.record(config.label, fold, "grid search", train_ids, test_ids)
        scaler = fit_scaler(X_train)
        audit.record(config.label, fold, "scaler", train_ids, test_ids)
        clf = fit_classifier(config.classifier, search.best, apply_scaler(scaler, X_train), y_train)
        audit.record(config.label, fold, f"{config.classifier} classifier", train_ids, test_ids)
        predicted = predict(clf, apply_scaler(scaler, X_test))
        timings["classifier"] += time.perf_counter() - t0

        per_fold.append(weighted_f1(y_test, predicted))
        hyper.append(search.best)
        for c, f in per_class_f1(y_test, predicted).items():
            class_scores.setdefault(str(c), []).append(f)

    mean, std = mean_std(per_fold)
    return ExperimentResult(
        config=config.echo(),
        per_fold=per_fold,
        mean=mean,
        std=std,
        per_class={c: float(np.mean(v)) for c, v in sorted(class_scores.items())},
        hyperparameters=hyper,
        timings=timings,
        feature_dim=12 * frame_dim(config.family, config.dim),
    )


def run_sweep(config: ExperimentConfig, dims, store: FrameStore | None = None, audit: AuditLog | None = None):
    """One experiment per dimensionality, all on the same folds."""
    store = store or FrameStore(config.dataset)
    folds = assign_folds(config)
    return [run_experiment(replace(config, dim=d), store, audit, folds=folds) for d in dims]


def train_transfer_encoder(sources, hidden: int, seed: int = 0, ae_options: dict | None = None) -> FrameModel:
    """Autoencoder fitted on every frame of one or more source corpora.

    ``sources`` is a FrameStore or a list of them (combined-sources mode).
    """
    if isinstance(sources, FrameStore):
        sources = [sources]
    frames = [s.frames(t, "mel") for s in sources for t in s.manifest.track_ids]
    return fit_frame_model("MEL-AE", hidden, frames, seed=seed, ae_options=ae_options)


def run_transfer(
    sources,
    target: FrameStore,
    hidden: int,
    config: ExperimentConfig,
    audit: AuditLog | None = None,
) -> ExperimentResult:
    """Score ``target`` with an encoder learned, label-free, on ``sources``.

    The encoder is fitted once outside the fold loop; labels of the source
    corpora are never read.
    """
    encoder = train_transfer_encoder(sources, hidden, config.seed, config.ae_options)
    cfg = replace(config, dataset=target.manifest, family="MEL-AE", dim=hidden)
    result = run_experiment(cfg, target, audit, frame_model=encoder)
    names = [s.manifest.name for s in ([sources] if isinstance(sources, FrameStore) else sources)]
    result.config["transfer_sources"] = names
    return result


def sweep_rows(results) -> list[dict]:
    """Plot-ready rows: dim, classifier, family, mean_f1, std_f1."""
    return [
        {
            "dim": r.config["dim"],
            "classifier": r.config["classifier"],
            "family": r.config["family"],
            "mean_f1": r.mean,
            "std_f1": r.std,
        }
        for r in results
    ]
