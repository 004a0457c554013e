"""From a WAV file to one fixed-length track vector.

Renders a single synthetic clip and walks it through the front end:
STFT, log-mel frames, the 26 hand-crafted MARSYAS columns, and the
delta / texture-window / track-statistics aggregation.
"""

import tempfile
from pathlib import Path

import numpy as np

from melrp.aggregation import TEXTURE_WINDOW, add_deltas, aggregate, texture_stats
from melrp.audio_io import load_audio
from melrp.handcrafted import MARSYAS_COLUMNS, marsyas_features
from melrp.spectral import log_mel, mel_filterbank, stft
from melrp.synthetic import make_synthetic_corpus

root = Path(tempfile.mkdtemp())
manifest = make_synthetic_corpus(root, n_tracks=2, seed=0, duration=6.0)
clip = load_audio(root / manifest.tracks[0].path)
print(manifest.tracks[0].track_id, manifest.tracks[0].genre, clip.sample_rate, "Hz", len(clip.samples), "samples")

# %% magnitude spectrogram: 1024-sample Hann frames, hop 512, no padding
spec = stft(clip)
print("STFT power frames:", spec.frames.shape)

# %% 128 triangular mel filters up to Nyquist, then log with a small floor
fb = mel_filterbank()
print("filterbank:", fb.shape, "non-empty filters:", int((fb.sum(axis=1) > 0).sum()))
mel = log_mel(clip)
print("log-mel frames:", mel.shape, "range", mel.min().round(1), mel.max().round(1))

# %% hand-crafted baseline, one row per frame
marsyas = marsyas_features(clip)
print("MARSYAS frames:", marsyas.shape)
print({k: round(float(v), 3) for k, v in zip(MARSYAS_COLUMNS[:6], marsyas[:, :6].mean(axis=0))})

# %% aggregation: append deltas, summarise ~2.5 s texture windows, then the track
with_deltas = add_deltas(mel)
windows = texture_stats(with_deltas, TEXTURE_WINDOW)
vector = aggregate(mel)
print("frames + deltas:", with_deltas.shape)
print("texture windows:", windows.shape)
print("track vector:", vector.shape, "= 12 x", vector.shape[0] // 12)
assert np.isfinite(vector).all()
