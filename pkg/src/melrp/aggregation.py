"""Frame features -> fixed-length track vectors.

``T x F`` frames become ``T x 3F`` with first and second differences, then
``T_tex x 6F`` texture-window means and variances, then a ``12F`` vector of
the mean and variance over texture windows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HOP_SECONDS = 512 / 44100
TEXTURE_WINDOW = 216  # frames; 216 * 512 / 44100 ~= 2.5 s

FAMILIES = ("MEL-SPEC", "MEL-RP", "MEL-PCA", "MEL-AE", "MARSYAS")


@dataclass(frozen=True)
class FrameFeatures:
    values: np.ndarray
    family: str
    frame_hop_seconds: float = HOP_SECONDS

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown feature family {self.family!r}")
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1:
            raise ValueError("frame features must be a T x F matrix with T >= 1")
        if not np.all(np.isfinite(v)):
            raise ValueError("frame features must be finite")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class TrackVector:
    values: np.ndarray
    family: str
    track_id: str


def delta(x: np.ndarray) -> np.ndarray:
    """Centered difference along time with edge replication."""
    padded = np.concatenate([x[:1], x, x[-1:]], axis=0)
    return (padded[2:] - padded[:-2]) / 2.0


def add_deltas(features) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError("expected a T x F matrix with T >= 1")
    d1 = delta(x)
    return np.hstack([x, d1, delta(d1)])


def texture_stats(features, window_frames: int = TEXTURE_WINDOW) -> np.ndarray:
    """Sliding (hop 1) population mean and variance; ``[means | variances]`` per window.

    Fewer than ``window_frames`` frames yields one window over everything.
    """
    x = np.asarray(features, dtype=np.float64)
    T = x.shape[0]
    w = min(window_frames, T)
    # centering first keeps the running-sum variance well conditioned
    col_mean = x.mean(axis=0)
    x = x - col_mean
    zero = np.zeros((1, x.shape[1]))
    s1 = np.concatenate([zero, np.cumsum(x, axis=0)])
    s2 = np.concatenate([zero, np.cumsum(x * x, axis=0)])
    sum1 = s1[w:] - s1[:-w]
    sum2 = s2[w:] - s2[:-w]
    mean_c = sum1 / w
    var = np.maximum(sum2 / w - mean_c**2, 0.0)
    return np.hstack([mean_c + col_mean, var])


def track_vector(texture) -> np.ndarray:
    t = np.asarray(texture, dtype=np.float64)
    if t.ndim != 2 or t.shape[0] < 1:
        raise ValueError("expected at least one texture frame")
    return np.concatenate([t.mean(axis=0), t.var(axis=0)])


def aggregate(frames, window_frames: int = TEXTURE_WINDOW) -> np.ndarray:
    """Full chain: deltas, texture windows, track statistics."""
    return track_vector(texture_stats(add_deltas(frames), window_frames))
