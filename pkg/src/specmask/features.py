"""Audio ingestion and the log-mel spectrogram front end.

Mono PCM in, standardized log-mel out. Resampling is deliberately not
offered: a clip whose rate differs from the requested analysis rate is an
error, so provenance stays honest. Precomputed spectrograms can be loaded
from a raw little-endian float32 format (one frame = ``n_mels`` contiguous
values).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    ClipTooShort,
    EmptyAudio,
    IoFailure,
    MalformedContainer,
    NonFiniteValue,
    SampleRateMismatch,
    SizeNotDivisible,
    UnsupportedEncoding,
    ZeroVariance,
)

LOG_EPS = 1e-8

_WAVE_PCM = 1
_WAVE_FLOAT = 3
_WAVE_EXTENSIBLE = 0xFFFE


@dataclass(frozen=True)
class MelParams:
    """Front-end configuration. Defaults: 16 kHz, 25 ms window, 10 ms hop,
    80 mel bins over 50-8000 Hz, Hann window."""

    sample_rate: int = 16000
    fft_size: int = 400
    hop_length: int = 160
    n_mels: int = 80
    fmin: float = 50.0
    fmax: float = 8000.0


@dataclass(frozen=True)
class NormStats:
    mean: float
    std: float


@dataclass
class AudioClip:
    samples: np.ndarray  # float64 in [-1, 1]
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.size == 0:
            raise EmptyAudio("clip has no samples")
        if not np.all(np.isfinite(self.samples)):
            raise NonFiniteValue("clip contains non-finite samples")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")


@dataclass
class Spectrogram:
    """2-D log-mel magnitudes, shape (n_mels, n_frames).

    ``mel_params`` and ``normalization`` are None for spectrograms loaded
    from raw files (provenance unknown, no standardization applied).
    """

    data: np.ndarray
    mel_params: MelParams | None = None
    normalization: NormStats | None = None

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2 or self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise ValueError("spectrogram must be a non-empty 2-D array")
        if not np.all(np.isfinite(self.data)):
            raise NonFiniteValue("spectrogram contains non-finite values")

    @property
    def n_mels(self) -> int:
        return self.data.shape[0]

    @property
    def n_frames(self) -> int:
        return self.data.shape[1]


def _read_file(path) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def load_wav(path) -> AudioClip:
    """Read a RIFF/WAVE file (PCM16 or float32; multi-channel averaged to mono).

    16-bit samples are scaled by 1/32768 so full-scale negative maps to -1.0;
    float samples are clipped to [-1, 1].
    """
    raw = _read_file(path)
    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise MalformedContainer("not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        cid = raw[pos : pos + 4]
        (size,) = struct.unpack_from("<I", raw, pos + 4)
        body = raw[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise MalformedContainer(f"truncated {cid!r} chunk")
        if cid == b"fmt ":
            fmt = body
        elif cid == b"data":
            data = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    if fmt is None or data is None:
        raise MalformedContainer("missing fmt or data chunk")
    if len(fmt) < 16:
        raise MalformedContainer("fmt chunk too small")

    tag, channels, rate, _, _, bits = struct.unpack_from("<HHIIHH", fmt, 0)
    if tag == _WAVE_EXTENSIBLE:
        if len(fmt) < 26:
            raise MalformedContainer("extensible fmt chunk too small")
        (tag,) = struct.unpack_from("<H", fmt, 24)  # first two GUID bytes
    if channels < 1:
        raise MalformedContainer("zero channels")

    if tag == _WAVE_PCM and bits == 16:
        samples = np.frombuffer(data, dtype="<i2").astype(np.float64) / 32768.0
    elif tag == _WAVE_FLOAT and bits == 32:
        samples = np.frombuffer(data, dtype="<f4").astype(np.float64)
        if not np.all(np.isfinite(samples)):
            raise NonFiniteValue("float wav contains non-finite samples")
        samples = np.clip(samples, -1.0, 1.0)
    else:
        raise UnsupportedEncoding(f"format tag {tag} with {bits} bits not supported")

    if samples.size == 0:
        raise EmptyAudio("wav contains no samples")
    if samples.size % channels != 0:
        raise MalformedContainer("data chunk not divisible by channel count")
    if channels > 1:
        samples = samples.reshape(-1, channels).mean(axis=1)
    return AudioClip(samples=samples, sample_rate=rate)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(params: MelParams) -> np.ndarray:
    """Triangular mel filterbank, shape (n_mels, fft_size // 2 + 1).

    Triangles have unit height at their center frequency; sampling at the
    FFT bin frequencies can land below the apex for narrow filters."""
    n_bins = params.fft_size // 2 + 1
    bin_freqs = np.arange(n_bins) * params.sample_rate / params.fft_size
    edges = mel_to_hz(np.linspace(hz_to_mel(params.fmin), hz_to_mel(params.fmax), params.n_mels + 2))
    fb = np.zeros((params.n_mels, n_bins))
    for i in range(params.n_mels):
        lo, mid, hi = edges[i], edges[i + 1], edges[i + 2]
        rising = (bin_freqs - lo) / (mid - lo)
        falling = (hi - bin_freqs) / (hi - mid)
        fb[i] = np.maximum(0.0, np.minimum(rising, falling))
    return fb


def frame_count(n_samples: int, params: MelParams) -> int:
    return (n_samples - params.fft_size) // params.hop_length + 1


def logmel(clip: AudioClip, params: MelParams | None = None) -> Spectrogram:
    """Log-mel spectrogram, standardized to zero mean and unit std.

    No centering or padding: frame t covers samples [t*hop, t*hop + fft).
    """
    params = params or MelParams()
    if clip.sample_rate != params.sample_rate:
        raise SampleRateMismatch(
            f"clip rate {clip.sample_rate} != analysis rate {params.sample_rate}"
        )
    if clip.samples.size < params.fft_size:
        raise ClipTooShort(f"need at least {params.fft_size} samples, got {clip.samples.size}")

    frames = np.lib.stride_tricks.sliding_window_view(clip.samples, params.fft_size)
    frames = frames[:: params.hop_length]
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(params.fft_size) / params.fft_size)
    spectrum = np.fft.rfft(frames * window, axis=1)
    power = spectrum.real**2 + spectrum.imag**2
    mel_energy = power @ mel_filterbank(params).T  # (n_frames, n_mels)
    log_spec = np.log(mel_energy + LOG_EPS).T

    mean = float(log_spec.mean())
    std = float(log_spec.std())
    # exact-constancy check: rounding in the mean can leave std at ~1 ulp
    if std == 0.0 or log_spec.max() == log_spec.min():
        raise ZeroVariance("spectrogram is constant; cannot standardize")
    return Spectrogram(
        data=(log_spec - mean) / std,
        mel_params=params,
        normalization=NormStats(mean=mean, std=std),
    )


def load_raw_spectrogram(path, n_mels: int) -> Spectrogram:
    """Load little-endian float32 frames (frame t = n_mels contiguous values).

    No normalization is applied.
    """
    raw = _read_file(path)
    if len(raw) == 0:
        raise EmptyAudio("raw spectrogram file is empty")
    frame_bytes = 4 * int(n_mels)
    if len(raw) % frame_bytes != 0:
        raise SizeNotDivisible(f"file size {len(raw)} not divisible by {frame_bytes}")
    values = np.frombuffer(raw, dtype="<f4")
    if not np.all(np.isfinite(values)):
        raise NonFiniteValue("raw spectrogram contains non-finite values")
    data = values.reshape(-1, int(n_mels)).T.astype(np.float64)
    return Spectrogram(data=data, mel_params=None, normalization=None)


def write_raw_spectrogram(data: np.ndarray, path) -> None:
    """Inverse of :func:`load_raw_spectrogram` (frame-major float32)."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D array")
    try:
        with open(path, "wb") as fh:
            fh.write(arr.T.astype("<f4").tobytes())
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
