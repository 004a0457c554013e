"""Command-line entry point: ``melrp extract | evaluate | report``.

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from .cache import FeatureCache, content_digest, pipeline_params
from .classifiers.search import CLASSIFIERS
from .evaluation import (
    PREDEFINED,
    AuditLog,
    ExperimentConfig,
    ExperimentResult,
    run_experiment,
    run_transfer,
    sweep_rows,
    assign_folds,
)
from .features import (
    FAMILY_ALIASES,
    FITTED_FAMILIES,
    SIZED_FAMILIES,
    FrameStore,
    TrackError,
    base_frames,
    base_kind,
    canonical_family,
    fit_frame_model,
    frame_dim,
    track_vector,
)
from .audio_io import load_audio
from .manifest import ManifestError, load_manifest

log = logging.getLogger("melrp")

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2
SWEEP_COLUMNS = ("dim", "classifier", "family", "mean_f1", "std_f1")


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


# ---------------------------------------------------------------- extract


def _vector_job(path: str, family: str, dim, seed: int) -> np.ndarray:
    clip = load_audio(path)
    model = fit_frame_model(family, dim, seed=seed)
    return track_vector(base_frames(clip, base_kind(family)), model)


def _map(fn, arg_lists, jobs: int):
    """Run ``fn`` over argument tuples; yields (result, exception) in order."""
    if jobs <= 1:
        for args in arg_lists:
            try:
                yield fn(*args), None
            except Exception as exc:  # reported per track
                yield None, exc
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(fn, *args) for args in arg_lists]
        for fut in futures:
            try:
                yield fut.result(), None
            except Exception as exc:
                yield None, exc


def cmd_extract(manifest_path, family, dims, seed, cache_dir, jobs=1, audio_root=None, cache_frames=False) -> int:
    """Write one track vector per (track, dim) into the cache.

    MEL-PCA and MEL-AE models are fitted on every track of the manifest
    here (an unsupervised, whole-corpus fit); ``evaluate`` refits them per
    fold and does not read these vectors.
    """
    try:
        manifest = load_manifest(str(manifest_path), name=Path(manifest_path).stem)
    except (OSError, ManifestError) as exc:
        log.error("cannot load manifest: %s", exc)
        return EXIT_CONFIG
    family = canonical_family(family)
    root = Path(audio_root) if audio_root else Path(manifest_path).parent
    cache = FeatureCache(cache_dir)
    store = FrameStore(manifest, root, disk_cache=cache if cache_frames else None)
    dims = list(dims) if family in SIZED_FAMILIES else [None]
    if None in dims and family in SIZED_FAMILIES:
        log.error("%s needs --dims", family)
        return EXIT_CONFIG

    audio = {}
    failed = set()
    for t in manifest.tracks:
        try:
            audio[t.track_id] = hashlib.sha256(store.path_of(t.track_id).read_bytes()).hexdigest()
        except OSError as exc:
            log.error("track %s: %s", t.track_id, exc)
            failed.add(t.track_id)
    ok_ids = [t for t in manifest.track_ids if t not in failed]

    extracted = hits = 0
    for dim in dims:
        F = frame_dim(family, dim)
        params = pipeline_params(family=family, dim=F, seed=seed)
        if family in FITTED_FAMILIES:
            corpus = hashlib.sha256("".join(audio[t] for t in ok_ids).encode()).hexdigest()
            params["fitted_on"] = corpus
        digests = {t: content_digest(audio[t].encode(), params) for t in ok_ids}
        todo = [t for t in ok_ids if cache.get(digests[t], cols=12 * F) is None]
        hits += len(ok_ids) - len(todo)
        if not todo:
            continue

        if family in FITTED_FAMILIES:
            kind = base_kind(family)
            frames = {}
            for tid in ok_ids:
                try:
                    frames[tid] = store.frames(tid, kind)
                except TrackError as exc:
                    log.error("track %s: %s", tid, exc.cause)
                    failed.add(tid)
            if not frames:
                continue
            model = fit_frame_model(family, F, list(frames.values()), seed=seed)
            vectors = [(track_vector(frames[t], model), None) if t in frames else (None, None) for t in todo]
        else:
            vectors = _map(_vector_job, [(str(store.path_of(t)), family, F, seed) for t in todo], jobs)

        for tid, (vec, exc) in zip(todo, vectors):
            if exc is not None:
                log.error("track %s: %s", tid, exc)
                failed.add(tid)
                continue
            if vec is None:
                continue
            cache.put(digests[tid], vec, track_id=tid, family=family, dims=F, seed=seed)
            extracted += 1

    log.info("extract: %d computed, %d cache hits, %d failed", extracted, hits, len(failed))
    print(f"extracted={extracted} cached={hits} failed={len(failed)}")
    return EXIT_FAILURE if failed else EXIT_OK


# ---------------------------------------------------------------- evaluate


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"{where}{key}", "required field is missing")
    return d[key]


def parse_config(path) -> dict:
    """Load and validate an experiment config; raises ConfigError with the field path."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError("<file>", str(exc)) from exc
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "expected a mapping")
    base = path.parent

    dataset = _require(raw, "dataset", "")
    if not isinstance(dataset, dict):
        raise ConfigError("dataset", "expected a mapping with a 'manifest' entry")
    manifest = base / str(_require(dataset, "manifest", "dataset."))
    cfg = {
        "manifest": manifest,
        "name": str(dataset.get("name", manifest.stem)),
        "audio_root": base / dataset["audio_root"] if "audio_root" in dataset else manifest.parent,
    }

    family = _require(raw, "family", "")
    try:
        cfg["family"] = canonical_family(str(family))
    except ValueError:
        raise ConfigError("family", f"unknown family {family!r}; expected one of {', '.join(FAMILY_ALIASES)}")

    dims = raw.get("dims")
    if cfg["family"] in SIZED_FAMILIES:
        if dims is None:
            raise ConfigError("dims", f"{cfg['family']} needs a list of dimensionalities")
        if isinstance(dims, int):
            dims = [dims]
        if not isinstance(dims, list) or not dims or not all(isinstance(d, int) and d > 0 for d in dims):
            raise ConfigError("dims", "expected a non-empty list of positive integers")
        cfg["dims"] = dims
    else:
        cfg["dims"] = [None]

    classifier = raw.get("classifier", "svm")
    if classifier not in CLASSIFIERS:
        raise ConfigError("classifier", f"expected one of {', '.join(CLASSIFIERS)}, got {classifier!r}")
    cfg["classifier"] = classifier

    grid = raw.get("grid")
    if grid is not None and (not isinstance(grid, list) or not grid or not all(isinstance(g, (int, float)) for g in grid)):
        raise ConfigError("grid", "expected a non-empty list of numbers")
    cfg["grid"] = tuple(grid) if grid else None

    folds = raw.get("folds", 10)
    if not (folds == PREDEFINED or (isinstance(folds, int) and folds >= 2)):
        raise ConfigError("folds", f"expected an integer >= 2 or {PREDEFINED!r}, got {folds!r}")
    cfg["folds"] = folds

    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed", "expected an integer")
    cfg["seed"] = seed

    cfg["output"] = base / str(raw.get("output", "results"))
    cfg["cache"] = base / str(raw["cache"]) if raw.get("cache") else None

    ae = raw.get("autoencoder", {}) or {}
    allowed = {"learning_rate", "momentum", "batch_size", "max_epochs", "patience", "validation_fraction", "max_frames"}
    if not isinstance(ae, dict):
        raise ConfigError("autoencoder", "expected a mapping")
    for key in ae:
        if key not in allowed:
            raise ConfigError(f"autoencoder.{key}", "unknown option")
    cfg["ae_options"] = ae

    transfer = raw.get("transfer")
    if transfer is not None:
        if cfg["family"] != "MEL-AE":
            raise ConfigError("transfer", "transfer experiments use the mel-ae family")
        sources = transfer.get("sources") if isinstance(transfer, dict) else None
        if not isinstance(sources, list) or not sources:
            raise ConfigError("transfer.sources", "expected a non-empty list of manifest paths")
        cfg["transfer_sources"] = [base / str(s) for s in sources]
    return cfg


def _result_stem(r: ExperimentResult) -> str:
    c = r.config
    dim = "" if c["dim"] is None else f"_{c['dim']}"
    tag = "_from_" + "+".join(c["transfer_sources"]) if c.get("transfer_sources") else ""
    return f"{c['dataset']}_{c['family']}{dim}_{c['classifier']}{tag}".replace("/", "-")


def write_sweep_csv(path, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row[k] is None else row[k]) for k in SWEEP_COLUMNS})


def cmd_evaluate(config_path, out=None) -> int:
    try:
        cfg = parse_config(config_path)
        manifest = load_manifest(str(cfg["manifest"]), name=cfg["name"])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ManifestError) as exc:
        print(f"config error: dataset.manifest: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = Path(out) if out else cfg["output"]
    out_dir.mkdir(parents=True, exist_ok=True)
    cache = FeatureCache(cfg["cache"]) if cfg["cache"] else None
    store = FrameStore(manifest, cfg["audio_root"], disk_cache=cache)
    audit = AuditLog()
    results = []
    try:
        base = ExperimentConfig(
            manifest, cfg["family"], cfg["dims"][0], cfg["classifier"], cfg["folds"], cfg["seed"],
            cfg["grid"], cfg["ae_options"],
        )
        folds = assign_folds(base)
        sources = None
        if "transfer_sources" in cfg:
            sources = []
            for p in cfg["transfer_sources"]:
                m = load_manifest(str(p), name=p.stem)
                sources.append(FrameStore(m, p.parent, disk_cache=cache))
        for dim in cfg["dims"]:
            config = ExperimentConfig(
                manifest, cfg["family"], dim, cfg["classifier"], cfg["folds"], cfg["seed"],
                cfg["grid"], cfg["ae_options"],
            )
            if sources:
                result = run_transfer(sources, store, dim, config, audit)
            else:
                result = run_experiment(config, store, audit, folds=folds)
            result.to_json(out_dir / f"{_result_stem(result)}.json")
            log.info("%s: %.3f +/- %.3f", config.label, result.mean, result.std)
            results.append(result)
    except (ManifestError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        log.error("experiment failed: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE

    c = results[0].config
    sweep_name = f"{c['dataset']}_{c['family']}_{c['classifier']}_sweep.csv"
    write_sweep_csv(out_dir / sweep_name, sweep_rows(results))
    for r in results:
        print(f"{_result_stem(r)}: {format_score(r.mean, r.std, len(r.per_fold))}")
    return EXIT_OK


# ---------------------------------------------------------------- report


def format_score(mean: float, std: float, n_folds: int = 2) -> str:
    """Two-decimal ``mean ± std``; a single split shows the mean only."""
    if n_folds <= 1:
        return f"{mean:.2f}"
    return f"{mean:.2f} ± {std:.2f}"


def load_results(results_dir) -> list[ExperimentResult]:
    out = []
    for p in sorted(Path(results_dir).glob("*.json")):
        try:
            d = json.loads(p.read_text(encoding="utf-8"))
            out.append(ExperimentResult.from_dict(d))
        except (ValueError, KeyError, TypeError):
            log.warning("skipping %s: not an experiment result", p.name)
    return out


def summarize(results) -> list[dict]:
    """Best-of-sweep row per (dataset, family, classifier, transfer source)."""
    groups: dict = {}
    for r in results:
        c = r.config
        key = (c["dataset"], c["family"], c["classifier"], "+".join(c.get("transfer_sources") or []))
        groups.setdefault(key, []).append(r)
    rows = []
    for (dataset, family, classifier, sources), rs in sorted(groups.items()):
        best = max(rs, key=lambda r: r.mean)
        rows.append({
            "dataset": dataset,
            "family": family,
            "classifier": classifier,
            "transfer_sources": sources,
            "dim": best.config["dim"],
            "mean_f1": best.mean,
            "std_f1": best.std,
            "score": format_score(best.mean, best.std, len(best.per_fold)),
        })
    return rows


def cmd_report(results_dir, out=None) -> int:
    results = load_results(results_dir)
    if not results:
        print(f"error: no experiment results in {results_dir}", file=sys.stderr)
        return EXIT_FAILURE
    out_dir = Path(out) if out else Path(results_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = summarize(results)
    fields = ["dataset", "family", "classifier", "transfer_sources", "dim", "mean_f1", "std_f1", "score"]
    with open(out_dir / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row[k] is None else row[k]) for k in fields})

    lines = ["| dataset | family | classifier | source | dim | weighted F1 |", "|---|---|---|---|---|---|"]
    for row in rows:
        dim = "" if row["dim"] is None else row["dim"]
        lines.append(
            f"| {row['dataset']} | {row['family']} | {row['classifier']} | "
            f"{row['transfer_sources'] or '-'} | {dim} | {row['score']} |"
        )
    (out_dir / "summary.md").write_text("\n".join(lines) + "\n", encoding="utf-8")

    sweeps: dict = {}
    for r in results:
        c = r.config
        sweeps.setdefault((c["dataset"], c["family"], c["classifier"]), []).append(r)
    for (dataset, family, classifier), rs in sweeps.items():
        rs = sorted(rs, key=lambda r: (r.config["dim"] is None, r.config["dim"] or 0))
        write_sweep_csv(out_dir / f"sweep_{dataset}_{family}_{classifier}.csv", sweep_rows(rs))
    print("\n".join(lines))
    return EXIT_OK


# ---------------------------------------------------------------- argparse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="melrp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("extract", help="compute and cache track vectors")
    ex.add_argument("--manifest", required=True)
    ex.add_argument("--family", required=True, choices=sorted(FAMILY_ALIASES))
    ex.add_argument("--dims", type=int, nargs="+", default=None)
    ex.add_argument("--seed", type=int, default=0)
    ex.add_argument("--cache", required=True)
    ex.add_argument("--jobs", type=int, default=1)
    ex.add_argument("--audio-root", default=None, help="base for relative track paths (default: manifest dir)")
    ex.add_argument("--cache-frames", action="store_true", help="also cache frame-level base features")

    ev = sub.add_parser("evaluate", help="run the experiment described by a config file")
    ev.add_argument("--config", required=True)
    ev.add_argument("--out", default=None)

    rp = sub.add_parser("report", help="merge result files into summary tables")
    rp.add_argument("--results", "--out-dir", dest="results", required=True)
    rp.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "extract":
        return cmd_extract(
            args.manifest, args.family, args.dims or [None], args.seed, args.cache,
            jobs=args.jobs, audio_root=args.audio_root, cache_frames=args.cache_frames,
        )
    if args.command == "evaluate":
        return cmd_evaluate(args.config, args.out)
    return cmd_report(args.results, args.out)


if __name__ == "__main__":
    sys.exit(main())
