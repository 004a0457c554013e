"""WAV ingestion: decode, mix to mono, resample to 44.1 kHz."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy import signal

TARGET_RATE = 44100
MIN_SAMPLES = 1024  # one STFT frame

# Polyphase anti-aliasing filter
KAISER_BETA = 8.6
TAPS_PER_PHASE = 64

_PCM = 0x0001
_FLOAT = 0x0003
_EXTENSIBLE = 0xFFFE


class AudioDecodeError(ValueError):
    pass


class EmptyAudioError(AudioDecodeError):
    pass


@dataclass(frozen=True)
class AudioClip:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("AudioClip holds mono samples only")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("audio samples must be finite")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate


def _read_chunks(data: bytes):
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise AudioDecodeError("not a RIFF/WAVE file")
    pos = 12
    while pos + 8 <= len(data):
        cid, size = struct.unpack_from("<4sI", data, pos)
        body = data[pos + 8 : pos + 8 + size]
        yield cid, body, len(body) < size
        pos += 8 + size + (size & 1)


def decode_wav(data: bytes) -> tuple[np.ndarray, int]:
    """Decode WAV bytes to a float64 ``(n, channels)`` array and its rate.

    Integer PCM is scaled by ``2**(bits - 1)``; float payloads pass through.
    """
    fmt = None
    payload = None
    for cid, body, truncated in _read_chunks(data):
        if cid == b"fmt ":
            if truncated or len(body) < 16:
                raise AudioDecodeError("truncated fmt chunk")
            tag, channels, rate, _, block_align, bits = struct.unpack_from("<HHIIHH", body)
            if tag == _EXTENSIBLE:
                if len(body) < 40:
                    raise AudioDecodeError("truncated extensible fmt chunk")
                tag = struct.unpack_from("<H", body, 24)[0]
            fmt = (tag, channels, rate, block_align, bits)
        elif cid == b"data":
            if truncated:
                raise AudioDecodeError("truncated data chunk")
            payload = body
            break
    if fmt is None:
        raise AudioDecodeError("missing fmt chunk")
    if payload is None:
        raise AudioDecodeError("missing data chunk")

    tag, channels, rate, block_align, bits = fmt
    if channels < 1 or rate <= 0:
        raise AudioDecodeError(f"invalid header: {channels} channels at {rate} Hz")
    if tag == _PCM and bits in (16, 24, 32):
        width = bits // 8
    elif tag == _FLOAT and bits == 32:
        width = 4
    else:
        raise AudioDecodeError(f"unsupported codec (format tag {tag:#06x}, {bits} bits)")
    if block_align != width * channels:
        raise AudioDecodeError(f"inconsistent block alignment {block_align}")
    if len(payload) % block_align:
        raise AudioDecodeError("data chunk is not a whole number of frames")
    if not payload:
        raise EmptyAudioError("zero-length audio payload")

    if tag == _FLOAT:
        x = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    elif bits == 24:
        raw = np.frombuffer(payload, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        ints = raw[:, 0] | (raw[:, 1] << 8) | (raw[:, 2] << 16)
        ints = np.where(ints & 0x800000, ints - (1 << 24), ints)
        x = ints / float(1 << 23)
    else:
        x = np.frombuffer(payload, dtype=f"<i{width}").astype(np.float64) / float(1 << (bits - 1))
    if not np.all(np.isfinite(x)):
        raise AudioDecodeError("non-finite samples in payload")
    return x.reshape(-1, channels), rate


def encode_wav(samples: np.ndarray, sample_rate: int, bits: int = 16, float_format: bool = False) -> bytes:
    """Inverse of :func:`decode_wav` for 16/24/32-bit PCM or 32-bit float."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    channels = x.shape[1]
    if float_format:
        tag, bits = _FLOAT, 32
        payload = x.astype("<f4").tobytes()
    else:
        tag = _PCM
        scale = float(1 << (bits - 1))
        ints = np.clip(np.round(x * scale), -scale, scale - 1).astype(np.int64).ravel()
        if bits == 24:
            b = ints & 0xFFFFFF
            payload = np.stack([b & 0xFF, (b >> 8) & 0xFF, (b >> 16) & 0xFF], axis=1)
            payload = payload.astype(np.uint8).tobytes()
        elif bits in (16, 32):
            payload = ints.astype(f"<i{bits // 8}").tobytes()
        else:
            raise ValueError(f"unsupported bit depth {bits}")
    block = channels * bits // 8
    fmt = struct.pack("<HHIIHH", tag, channels, sample_rate, sample_rate * block, block, bits)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
    body += b"data" + struct.pack("<I", len(payload)) + payload
    if len(payload) & 1:
        body += b"\x00"
    return b"RIFF" + struct.pack("<I", len(body)) + body


def write_wav(path, samples: np.ndarray, sample_rate: int, bits: int = 16, float_format: bool = False):
    Path(path).write_bytes(encode_wav(samples, sample_rate, bits, float_format))


def mix_to_mono(frames: np.ndarray) -> np.ndarray:
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim == 1:
        return frames
    return frames.mean(axis=1)


def _kaiser_lowpass(up: int, down: int) -> np.ndarray:
    numtaps = TAPS_PER_PHASE * up + 1
    return signal.firwin(numtaps, 1.0 / max(up, down), window=("kaiser", KAISER_BETA))


def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    """Band-limited polyphase resampling.

    The ratio is reduced to lowest terms and the signal is filtered with a
    Kaiser-windowed sinc (beta 8.6, 64 taps per polyphase branch).  Output
    length is ``ceil(n * target / source)``.
    """
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if target_rate == clip.sample_rate:
        return clip
    ratio = Fraction(target_rate, clip.sample_rate)
    up, down = ratio.numerator, ratio.denominator
    y = signal.resample_poly(clip.samples, up, down, window=_kaiser_lowpass(up, down))
    return AudioClip(y, target_rate)


def load_audio(path, target_rate: int = TARGET_RATE) -> AudioClip:
    """Read a WAV file as a mono clip at ``target_rate``.

    Channels are averaged before resampling.  Clips shorter than one STFT
    frame at the target rate raise :class:`EmptyAudioError`.
    """
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise AudioDecodeError(f"cannot read {path}: {exc}") from exc
    frames, rate = decode_wav(data)
    clip = resample(AudioClip(mix_to_mono(frames), rate), target_rate)
    if len(clip) < MIN_SAMPLES:
        raise EmptyAudioError(f"{path}: {len(clip)} samples is shorter than one analysis frame")
    return clip
