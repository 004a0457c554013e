"""Binary matrix files and JSON-sidecar bundles.

Layout (little-endian)::

    b"MPRJ" | version: u8 | rows: u64 | cols: u64 | rows*cols float32, row-major
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

MAGIC = b"MPRJ"
VERSION = 1
_HEADER = struct.Struct("<4sBQQ")


class MatrixFormatError(ValueError):
    pass


def encode_matrix(matrix) -> bytes:
    m = np.asarray(matrix)
    if m.ndim == 1:
        m = m[None, :]
    if m.ndim != 2:
        raise MatrixFormatError(f"expected a 2-D matrix, got {m.ndim} dimensions")
    with np.errstate(over="ignore"):  # overflow shows up as inf and is rejected below
        payload = np.ascontiguousarray(m, dtype="<f4")
    if not np.all(np.isfinite(payload)):
        raise MatrixFormatError("matrix contains non-finite values (or overflows float32)")
    return _HEADER.pack(MAGIC, VERSION, m.shape[0], m.shape[1]) + payload.tobytes()


def decode_matrix(data: bytes) -> np.ndarray:
    if len(data) < _HEADER.size:
        raise MatrixFormatError("file shorter than the matrix header")
    magic, version, rows, cols = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise MatrixFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise MatrixFormatError(f"unsupported matrix file version {version}")
    expected = rows * cols * 4
    if len(data) - _HEADER.size != expected:
        raise MatrixFormatError(f"payload is {len(data) - _HEADER.size} bytes, header implies {expected}")
    m = np.frombuffer(data, dtype="<f4", offset=_HEADER.size).reshape(rows, cols).astype(np.float32)
    if not np.all(np.isfinite(m)):
        raise MatrixFormatError("matrix contains non-finite values")
    return m


def atomic_write(path, data: bytes):
    """Write-temp-then-rename so readers never see a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def write_matrix(path, matrix):
    atomic_write(path, encode_matrix(matrix))


def read_matrix(path) -> np.ndarray:
    return decode_matrix(Path(path).read_bytes())


def save_bundle(prefix, arrays: dict, meta: dict):
    """``<prefix>.<name>.mprj`` per array plus ``<prefix>.json`` holding ``meta``."""
    prefix = Path(prefix)
    shapes = {}
    for name, arr in arrays.items():
        arr = np.asarray(arr)
        shapes[name] = list(arr.shape)
        write_matrix(prefix.with_name(f"{prefix.name}.{name}.mprj"), arr.reshape(1, -1) if arr.ndim < 2 else arr)
    sidecar = dict(meta, arrays=shapes)
    atomic_write(prefix.with_name(f"{prefix.name}.json"), json.dumps(sidecar, indent=2, sort_keys=True).encode())


def load_bundle(prefix) -> tuple[dict, dict]:
    prefix = Path(prefix)
    meta = json.loads(prefix.with_name(f"{prefix.name}.json").read_text(encoding="utf-8"))
    arrays = {}
    for name, shape in meta.pop("arrays").items():
        m = read_matrix(prefix.with_name(f"{prefix.name}.{name}.mprj"))
        arrays[name] = m.reshape(shape).astype(np.float64)
    return arrays, meta
