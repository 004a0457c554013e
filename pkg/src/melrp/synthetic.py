"""Small synthetic genre corpora for tests and demos.

Two texture classes that differ grossly in spectral shape:

``harmonic``
    sequences of harmonic tones (random fundamentals, decaying partials)
``noise``
    band-pass filtered noise with slow amplitude modulation
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy import signal

from .audio_io import TARGET_RATE, write_wav
from .manifest import DatasetManifest, TrackEntry, dump_manifest

CLASSES = ("harmonic", "noise")


def harmonic_texture(rng, duration: float, sr: int = TARGET_RATE, f0_scale: float = 1.0) -> np.ndarray:
    n = int(duration * sr)
    out = np.zeros(n)
    note_len = int(0.5 * sr)
    fade = np.hanning(note_len)
    for start in range(0, n, note_len):
        f0 = rng.uniform(110.0, 440.0) * f0_scale
        t = np.arange(min(note_len, n - start)) / sr
        tone = np.zeros_like(t)
        for h in range(1, 9):
            if h * f0 >= sr / 2:
                break
            tone += np.sin(2 * np.pi * h * f0 * t + rng.uniform(0, 2 * np.pi)) / h
        out[start : start + len(t)] += tone * fade[: len(t)]
    out += 0.002 * rng.standard_normal(n)
    return 0.3 * out / np.max(np.abs(out))


def noise_texture(rng, duration: float, sr: int = TARGET_RATE, band_scale: float = 1.0) -> np.ndarray:
    n = int(duration * sr)
    lo = rng.uniform(2000.0, 5000.0) * band_scale
    hi = min(lo * rng.uniform(1.5, 2.5), 0.45 * sr)
    sos = signal.butter(4, [lo, hi], btype="bandpass", fs=sr, output="sos")
    x = signal.sosfilt(sos, rng.standard_normal(n))
    t = np.arange(n) / sr
    x *= 1.0 + 0.5 * np.sin(2 * np.pi * rng.uniform(0.5, 3.0) * t)
    return 0.3 * x / np.max(np.abs(x))


def make_synthetic_corpus(
    directory,
    n_tracks: int = 40,
    seed: int = 0,
    duration: float = 3.0,
    f0_scale: float = 1.0,
    name: str = "synthetic",
    sample_rate: int = TARGET_RATE,
) -> DatasetManifest:
    """Render ``n_tracks`` WAV files (alternating classes, one artist each).

    Writes ``manifest.csv`` next to the audio and returns the manifest; track
    paths are relative to ``directory``.  ``f0_scale`` shifts fundamentals
    and noise bands to make a related but distinct corpus.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    tracks = []
    for i in range(n_tracks):
        genre = CLASSES[i % 2]
        if genre == "harmonic":
            x = harmonic_texture(rng, duration, sample_rate, f0_scale)
        else:
            x = noise_texture(rng, duration, sample_rate, f0_scale)
        fname = f"{name}_{i:03d}.wav"
        write_wav(directory / fname, x, sample_rate)
        tracks.append(TrackEntry(f"{name}-{i:03d}", fname, genre, f"{name}-artist-{i:03d}"))
    manifest = DatasetManifest(name, tuple(tracks))
    (directory / "manifest.csv").write_text(dump_manifest(manifest), encoding="utf-8")
    return manifest
