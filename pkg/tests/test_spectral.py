import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from melrp.audio_io import AudioClip
from melrp.spectral import (
    DEFAULT_FRAME_SPEC,
    LOG_FLOOR,
    Spectrogram,
    StftFrameSpec,
    frame_signal,
    hz_to_mel,
    log_mel,
    mel_filterbank,
    mel_spectrogram,
    mel_to_hz,
    stft,
)

SR = 44100


def _naive_power(frame):
    """Direct O(N^2) one-sided DFT power of one windowed frame."""
    n = len(frame)
    w = np.array([0.5 - 0.5 * math.cos(2 * math.pi * i / (n - 1)) for i in range(n)])
    xw = frame * w
    k = np.arange(n // 2 + 1)[:, None]
    basis = np.exp(-2j * np.pi * k * np.arange(n)[None, :] / n)
    return np.abs(basis @ xw) ** 2, xw


def test_silence_shape():
    spec = stft(AudioClip(np.zeros(4096), SR))
    assert spec.frames.shape == (7, 513)
    assert not spec.frames.any()


@given(st.integers(min_value=1024, max_value=20000))
@settings(max_examples=40, deadline=None)
def test_frame_count_arithmetic(n):
    T = (n - 1024) // 512 + 1
    assert frame_signal(np.zeros(n)).shape == (T, 1024)
    assert DEFAULT_FRAME_SPEC.n_frames(n) == T


def test_short_clip_rejected():
    with pytest.raises(ValueError):
        stft(AudioClip(np.zeros(1000), SR))


def test_bin_20_sine():
    f = 20 * SR / 1024
    x = np.sin(2 * np.pi * f * np.arange(8192) / SR)
    spec = stft(AudioClip(x, SR))
    assert np.all(np.argmax(spec.frames, axis=1) == 20)


def test_against_direct_dft(rng):
    x = rng.normal(size=3000)
    spec = stft(AudioClip(x, SR))
    for t in range(spec.frames.shape[0]):
        want, _ = _naive_power(x[t * 512: t * 512 + 1024])
        np.testing.assert_allclose(spec.frames[t], want, rtol=1e-9, atol=1e-9)


def test_parseval(rng):
    # one-sided power counted once for DC and Nyquist, twice for the rest
    x = rng.normal(size=1024 * 4)
    spec = stft(AudioClip(x, SR))
    frames = frame_signal(x) * DEFAULT_FRAME_SPEC.window_array()
    for p, xw in zip(spec.frames, frames):
        spectral = (p[0] + 2 * p[1:-1].sum() + p[-1]) / 1024
        assert abs(spectral - np.sum(xw ** 2)) <= 1e-6 * np.sum(xw ** 2)


def test_frame_spec_invariants():
    with pytest.raises(ValueError):
        StftFrameSpec(frame_len=1000, hop=500)
    with pytest.raises(ValueError):
        StftFrameSpec(frame_len=1024, hop=256)


def test_doubling_amplitude_quadruples_power():
    x = np.sin(2 * np.pi * 3000 * np.arange(1024) / SR)
    a = stft(AudioClip(x, SR)).frames
    b = stft(AudioClip(2 * x, SR)).frames
    np.testing.assert_allclose(b, 4 * a, rtol=1e-6, atol=1e-12)


def _triangle_oracle(n_bins, n_mels, sr):
    """Hand-built filters: loops over filters and bins, no broadcasting."""
    mel = lambda f: 2595 * math.log10(1 + f / 700)
    hz = lambda m: 700 * (10 ** (m / 2595) - 1)
    top = mel(sr / 2)
    pts = [hz(top * i / (n_mels + 1)) for i in range(n_mels + 2)]
    fb = np.zeros((n_mels, n_bins))
    for m in range(n_mels):
        lo, c, hi = pts[m], pts[m + 1], pts[m + 2]
        for k in range(n_bins):
            f = k * sr / (2 * (n_bins - 1))
            if lo < f <= c:
                fb[m, k] = (f - lo) / (c - lo)
            elif c < f < hi:
                fb[m, k] = (hi - f) / (hi - c)
    return fb


def test_small_filterbank_matches_oracle():
    np.testing.assert_allclose(mel_filterbank(9, 4, 16000), _triangle_oracle(9, 4, 16000), atol=1e-9)


def test_full_filterbank_properties():
    fb = mel_filterbank()
    assert fb.shape == (128, 513)
    assert np.all(fb >= 0)
    assert np.all(fb.sum(axis=1) > 0)
    centers = mel_to_hz(np.linspace(0, hz_to_mel(SR / 2), 130))[1:-1]
    assert np.all(np.diff(centers) > 0)
    # several low filters share one bin, so peaks only need to be non-decreasing
    assert np.all(np.diff(np.argmax(fb, axis=1)) >= 0)
    for row in fb:
        nz = np.flatnonzero(row)
        assert nz[-1] - nz[0] + 1 == len(nz)  # one contiguous support
    # rows with bins inside the support agree with the loop oracle
    oracle = _triangle_oracle(513, 128, SR)
    full = oracle.sum(axis=1) > 0
    np.testing.assert_allclose(fb[full], oracle[full], atol=1e-9)


def test_log_mel_floor():
    spec = Spectrogram(np.zeros((3, 513)), DEFAULT_FRAME_SPEC, SR)
    np.testing.assert_allclose(mel_spectrogram(spec).frames, math.log(1e-10), atol=1e-12)
    assert abs(math.log(LOG_FLOOR) + 23.0259) < 1e-4


def test_log_mel_scaling_shift(rng):
    p = rng.uniform(0.5, 2.0, size=(5, 513))
    a = mel_spectrogram(Spectrogram(p, DEFAULT_FRAME_SPEC, SR)).frames
    b = mel_spectrogram(Spectrogram(10 * p, DEFAULT_FRAME_SPEC, SR)).frames
    np.testing.assert_allclose(b - a, math.log(10), atol=1e-6)


def test_log_mel_matmul_oracle(rng):
    p = rng.exponential(size=(6, 513))
    fb = mel_filterbank()
    want = np.array([[math.log(sum(fb[m, k] * p[t, k] for k in range(513)) + 1e-10) for m in range(128)]
                     for t in range(6)])
    got = mel_spectrogram(Spectrogram(p, DEFAULT_FRAME_SPEC, SR)).frames
    np.testing.assert_allclose(got, want, atol=1e-9)


def test_log_mel_monotone(rng):
    p = rng.exponential(size=(4, 513))
    a = mel_spectrogram(Spectrogram(p, DEFAULT_FRAME_SPEC, SR)).frames
    b = mel_spectrogram(Spectrogram(p + rng.exponential(size=p.shape), DEFAULT_FRAME_SPEC, SR)).frames
    assert np.all(b >= a)


def test_log_mel_shape(rng):
    out = log_mel(AudioClip(rng.normal(size=10000), SR))
    assert out.shape == ((10000 - 1024) // 512 + 1, 128)
    assert np.all(np.isfinite(out))
