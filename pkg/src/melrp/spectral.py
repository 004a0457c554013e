"""STFT and log-Mel front-end shared by every feature family."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .audio_io import TARGET_RATE, AudioClip

N_MELS = 128
LOG_FLOOR = 1e-10


@dataclass(frozen=True)
class StftFrameSpec:
    frame_len: int = 1024
    hop: int = 512
    window: str = "hanning"

    def __post_init__(self):
        if self.frame_len <= 0 or self.frame_len & (self.frame_len - 1):
            raise ValueError(f"frame_len must be a power of two, got {self.frame_len}")
        if self.hop * 2 != self.frame_len:
            raise ValueError("hop must be half the frame length (50% overlap)")
        if self.window != "hanning":
            raise ValueError(f"unsupported window {self.window!r}")

    @property
    def n_bins(self) -> int:
        return self.frame_len // 2 + 1

    def n_frames(self, n_samples: int) -> int:
        if n_samples < self.frame_len:
            raise ValueError(
                f"signal of {n_samples} samples is shorter than one frame ({self.frame_len})"
            )
        return (n_samples - self.frame_len) // self.hop + 1

    def window_array(self) -> np.ndarray:
        return np.hanning(self.frame_len)


DEFAULT_FRAME_SPEC = StftFrameSpec()


@dataclass(frozen=True)
class Spectrogram:
    frames: np.ndarray  # T x n_bins power
    frame_spec: StftFrameSpec
    sample_rate: int

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def bin_frequencies(self) -> np.ndarray:
        return np.arange(self.frames.shape[1]) * self.sample_rate / self.frame_spec.frame_len


@dataclass(frozen=True)
class MelSpectrogram:
    frames: np.ndarray  # T x 128 log energies
    mel_bands: int = N_MELS


def frame_signal(samples: np.ndarray, spec: StftFrameSpec = DEFAULT_FRAME_SPEC) -> np.ndarray:
    """Un-windowed ``T x frame_len`` view; the trailing partial frame is dropped."""
    samples = np.asarray(samples, dtype=np.float64)
    t = spec.n_frames(samples.shape[0])
    return sliding_window_view(samples, spec.frame_len)[:: spec.hop][:t]


def stft(clip: AudioClip, spec: StftFrameSpec = DEFAULT_FRAME_SPEC) -> Spectrogram:
    frames = frame_signal(clip.samples, spec) * spec.window_array()
    power = np.abs(np.fft.rfft(frames, axis=1)) ** 2
    return Spectrogram(power, spec, clip.sample_rate)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_fft_bins: int = 513, n_mels: int = N_MELS, sample_rate: int = TARGET_RATE) -> np.ndarray:
    """Triangular filters (peak 1) with centers evenly spaced in Mel from 0 Hz to Nyquist.

    A filter too narrow to contain any FFT bin gets the linear-interpolation
    weights of its center frequency on the two enclosing bins, so every row
    has positive mass.
    """
    if n_mels < 2:
        raise ValueError("n_mels must be at least 2")
    n_fft = 2 * (n_fft_bins - 1)
    freqs = np.arange(n_fft_bins) * sample_rate / n_fft
    edges = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2.0), n_mels + 2))
    lower, center, upper = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (freqs - lower) / (center - lower)
    falling = (upper - freqs) / (upper - center)
    fb = np.maximum(0.0, np.minimum(rising, falling))

    spacing = sample_rate / n_fft
    for i in np.flatnonzero(fb.sum(axis=1) <= 0):
        pos = edges[i + 1] / spacing
        k = min(int(np.floor(pos)), n_fft_bins - 2)
        frac = pos - k
        fb[i, k] = 1.0 - frac
        fb[i, k + 1] = frac
    return fb


@lru_cache(maxsize=8)
def _cached_filterbank(n_fft_bins: int, n_mels: int, sample_rate: int) -> np.ndarray:
    fb = mel_filterbank(n_fft_bins, n_mels, sample_rate)
    fb.setflags(write=False)
    return fb


def mel_spectrogram(spec: Spectrogram, n_mels: int = N_MELS) -> MelSpectrogram:
    """``ln(filterbank @ power + 1e-10)`` per frame."""
    fb = _cached_filterbank(spec.frames.shape[1], n_mels, spec.sample_rate)
    energies = spec.frames @ fb.T
    return MelSpectrogram(np.log(energies + LOG_FLOOR), n_mels)


def log_mel(clip: AudioClip, spec: StftFrameSpec = DEFAULT_FRAME_SPEC) -> np.ndarray:
    """Convenience: clip straight to the ``T x 128`` log-Mel matrix."""
    return mel_spectrogram(stft(clip, spec)).frames
