"""MARSYAS-style timbral frame features.

Per STFT frame: energy, spectral centroid, rolloff, flatness, flux,
zero-crossing rate and 20 MFCCs (26 values).
"""

from __future__ import annotations

import numpy as np
from scipy.fft import dct

from .audio_io import AudioClip
from .spectral import DEFAULT_FRAME_SPEC, StftFrameSpec, frame_signal, mel_spectrogram, stft

ROLLOFF = 0.85
FLATNESS_FLOOR = 1e-10
N_MFCC = 20
N_MARSYAS = 6 + N_MFCC

MARSYAS_COLUMNS = ("energy", "centroid", "rolloff", "flatness", "flux", "zcr") + tuple(
    f"mfcc{i}" for i in range(N_MFCC)
)


def _bin_freqs(n_bins: int, sample_rate: float) -> np.ndarray:
    return np.arange(n_bins) * sample_rate / (2 * (n_bins - 1))


def _sum_normalize(p: np.ndarray) -> np.ndarray:
    total = p.sum(axis=-1, keepdims=True)
    return np.divide(p, total, out=np.zeros_like(p), where=total > 0)


def spectral_frame_features(power_frame, prev_power_frame=None, sample_rate: float = 44100):
    """Energy, centroid, rolloff, flatness and flux of one power spectrum.

    Returns a tuple ``(energy, centroid, rolloff, flatness, flux)``; an
    all-zero frame has centroid and rolloff 0.
    """
    p = np.asarray(power_frame, dtype=np.float64)
    prev = None if prev_power_frame is None else np.asarray(prev_power_frame, dtype=np.float64)
    out = _spectral_block(p[None, :], sample_rate, prev=prev)
    return tuple(float(v) for v in out[0])


def _spectral_block(power: np.ndarray, sample_rate: float, prev: np.ndarray | None = None) -> np.ndarray:
    """Vectorized five spectral features for a ``T x K`` power matrix.

    Flux for row 0 is measured against ``prev`` when given, else 0.
    """
    freqs = _bin_freqs(power.shape[1], sample_rate)
    energy = power.sum(axis=1)
    safe = np.where(energy > 0, energy, 1.0)
    centroid = np.where(energy > 0, power @ freqs / safe, 0.0)

    cum = np.cumsum(power, axis=1)
    r = np.argmax(cum >= ROLLOFF * energy[:, None], axis=1)
    rolloff = np.where(energy > 0, freqs[r], 0.0)

    floored = power + FLATNESS_FLOOR
    flatness = np.exp(np.log(floored).mean(axis=1)) / floored.mean(axis=1)
    flatness = np.minimum(flatness, 1.0)

    norm = _sum_normalize(power)
    flux = np.zeros(power.shape[0])
    flux[1:] = ((norm[1:] - norm[:-1]) ** 2).sum(axis=1)
    if prev is not None:
        flux[0] = ((norm[0] - _sum_normalize(prev)) ** 2).sum()
    return np.column_stack([energy, centroid, rolloff, flatness, flux])


def zero_crossing_rate(time_frame) -> float:
    x = np.asarray(time_frame, dtype=np.float64)
    return float(_zcr_block(x[None, :])[0])


def _zcr_block(frames: np.ndarray) -> np.ndarray:
    # sign(0) counts as positive
    neg = frames < 0
    return (neg[:, 1:] != neg[:, :-1]).sum(axis=1) / (frames.shape[1] - 1)


def mfcc(mel_log_frame, n_coeffs: int = N_MFCC) -> np.ndarray:
    """Orthonormal DCT-II of a log-Mel vector (or of each row of a matrix)."""
    x = np.asarray(mel_log_frame, dtype=np.float64)
    return dct(x, type=2, norm="ortho", axis=-1)[..., :n_coeffs]


def marsyas_features(clip: AudioClip, spec: StftFrameSpec = DEFAULT_FRAME_SPEC) -> np.ndarray:
    """``T x 26`` matrix, columns in :data:`MARSYAS_COLUMNS` order."""
    power = stft(clip, spec)
    spectral = _spectral_block(power.frames, clip.sample_rate)
    zcr = _zcr_block(frame_signal(clip.samples, spec))
    cepstra = mfcc(mel_spectrogram(power).frames)
    return np.column_stack([spectral, zcr, cepstra])
