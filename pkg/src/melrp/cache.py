"""Content-addressed feature cache.

Entries are keyed by SHA-256 over the audio bytes plus a canonical JSON
rendering of every pipeline parameter, so changing a parameter can never
return stale features.  Each entry is a matrix file plus a JSON sidecar.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .aggregation import TEXTURE_WINDOW
from .matrixio import MatrixFormatError, atomic_write, read_matrix, write_matrix
from .spectral import DEFAULT_FRAME_SPEC, N_MELS

PIPELINE_VERSION = 1


def pipeline_params(**extra) -> dict:
    spec = DEFAULT_FRAME_SPEC
    params = {
        "pipeline_version": PIPELINE_VERSION,
        "frame_len": spec.frame_len,
        "hop": spec.hop,
        "window": spec.window,
        "n_mels": N_MELS,
        "texture_window": TEXTURE_WINDOW,
        "sample_rate": 44100,
    }
    params.update(extra)
    return params


def canonical(params: dict) -> bytes:
    return json.dumps(params, sort_keys=True, separators=(",", ":")).encode()


def content_digest(audio_bytes: bytes, params: dict) -> str:
    h = hashlib.sha256()
    h.update(hashlib.sha256(audio_bytes).digest())
    h.update(canonical(params))
    return h.hexdigest()


class FeatureCache:
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _paths(self, digest: str) -> tuple[Path, Path]:
        return self.root / f"{digest}.mprj", self.root / f"{digest}.json"

    def get(self, digest: str, cols: int | None = None) -> np.ndarray | None:
        """Cached matrix, or None when absent, mismatched or unreadable."""
        payload, sidecar = self._paths(digest)
        if not (payload.exists() and sidecar.exists()):
            return None
        try:
            meta = json.loads(sidecar.read_text(encoding="utf-8"))
            m = read_matrix(payload)
        except (OSError, ValueError, MatrixFormatError):
            return None
        if meta.get("digest") != digest or [meta.get("rows"), meta.get("cols")] != list(m.shape):
            return None
        if cols is not None and m.shape[1] != cols:
            return None
        return m

    def put(self, digest: str, matrix, **meta) -> np.ndarray:
        """Store and return the matrix exactly as a later ``get`` will."""
        m = np.atleast_2d(np.asarray(matrix))
        payload, sidecar = self._paths(digest)
        write_matrix(payload, m)
        meta = dict(meta, digest=digest, rows=m.shape[0], cols=m.shape[1])
        atomic_write(sidecar, json.dumps(meta, indent=2, sort_keys=True, default=str).encode())
        return m.astype(np.float32)

    def entries(self) -> list[dict]:
        out = []
        for p in sorted(self.root.glob("*.json")):
            try:
                out.append(json.loads(p.read_text(encoding="utf-8")))
            except ValueError:
                continue
        return out
