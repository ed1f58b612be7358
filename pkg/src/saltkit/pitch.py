"""Autocorrelation pitch tracking and the F0 correlation metric.

The tracker is deliberately plain: normalized cross-correlation per frame,
peak picking restricted to the speech F0 range, an energy gate against
silence.  It is meant for comparing contours of an utterance before and
after conversion, not for production pitch extraction.
"""

from __future__ import annotations

import logging
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .metrics import pearson

log = logging.getLogger(__name__)

# Candidates whose correlation is within this fraction of the frame maximum
# compete for the pitch; picking the first such peak prevents octave-down
# errors when a doubled lag correlates fractionally better.
_PEAK_BAND = 0.99


@dataclass
class F0Params:
    window_s: float = 0.040
    hop_s: float = 0.010
    fmin_hz: float = 50.0
    fmax_hz: float = 600.0
    voicing_threshold: float = 0.45
    energy_floor_db: float = -40.0

    def __post_init__(self) -> None:
        if not 0.0 < self.hop_s <= self.window_s:
            raise ValueError("need 0 < hop <= window")
        if not 0.0 < self.fmin_hz < self.fmax_hz:
            raise ValueError("need 0 < fmin < fmax")
        if not 0.0 < self.voicing_threshold < 1.0:
            raise ValueError("voicing threshold must be in (0, 1)")


@dataclass
class PitchTrack:
    """Per-frame F0 in Hz; 0.0 marks an unvoiced frame."""

    frame_hz: float
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise ValueError("pitch values must be 1-D")
        if self.frame_hz <= 0.0:
            raise ValueError("frame rate must be positive")

    @property
    def voiced(self) -> np.ndarray:
        return self.values > 0.0


def _nccf(frame: np.ndarray, lag_min: int, lag_max: int) -> np.ndarray:
    """Normalized cross-correlation r(tau) for tau in [lag_min, lag_max].

    r(tau) = sum(x[t] x[t+tau]) / sqrt(sum_head(x^2) * sum_tail(x^2)),
    computed via FFT autocorrelation plus cumulative energies.
    """
    w = frame.shape[0]
    size = 1
    while size < 2 * w:
        size <<= 1
    spec = np.fft.rfft(frame, size)
    raw = np.fft.irfft(spec * np.conj(spec), size)[: lag_max + 1]

    csum = np.concatenate([[0.0], np.cumsum(frame * frame)])
    taus = np.arange(lag_min, lag_max + 1)
    head = csum[w - taus]
    tail = csum[w] - csum[taus]
    denom = np.sqrt(head * tail)
    num = raw[lag_min:]
    return np.divide(num, denom, out=np.zeros_like(num), where=denom > 0.0)


def estimate_f0(
    samples: np.ndarray, sample_rate: int, params: F0Params | None = None
) -> PitchTrack:
    """Track F0 over fixed frames; frames failing the energy gate or the
    voicing threshold come back as 0."""
    params = params or F0Params()
    if sample_rate < 8000:
        raise ValueError(f"sample rate {sample_rate} too low, need >= 8000")
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("samples must be mono 1-D")

    window = int(round(params.window_s * sample_rate))
    hop = int(round(params.hop_s * sample_rate))
    lag_min = int(np.ceil(sample_rate / params.fmax_hz))
    lag_max = int(np.floor(sample_rate / params.fmin_hz))
    if lag_max >= window:
        raise ValueError("window too short for fmin; lengthen window_s")

    frame_hz = sample_rate / hop
    if x.size < window:
        return PitchTrack(frame_hz=frame_hz, values=np.zeros(0))

    starts = np.arange(0, x.size - window + 1, hop)
    rms = np.empty(starts.size)
    for i, s in enumerate(starts):
        seg = x[s : s + window]
        rms[i] = np.sqrt(float(seg @ seg) / window)
    peak_rms = float(rms.max())
    gate = peak_rms * 10.0 ** (params.energy_floor_db / 20.0)

    values = np.zeros(starts.size)
    for i, s in enumerate(starts):
        if peak_rms == 0.0 or rms[i] <= gate:
            continue
        r = _nccf(x[s : s + window], lag_min, lag_max)
        best = float(r.max())
        if best < params.voicing_threshold:
            continue
        # First contiguous run of near-maximal lags, then the apex inside it:
        # tracks the fundamental rather than a marginally stronger octave.
        near = np.flatnonzero(r >= _PEAK_BAND * best)
        run_end = near[0]
        while run_end + 1 <= near[-1] and r[run_end + 1] >= _PEAK_BAND * best:
            run_end += 1
        run = slice(near[0], run_end + 1)
        tau = lag_min + near[0] + int(np.argmax(r[run]))
        values[i] = sample_rate / tau
    return PitchTrack(frame_hz=frame_hz, values=values)


def pitch_correlation(orig: PitchTrack, anon: PitchTrack, min_voiced: int = 10) -> float:
    """Pearson correlation of two F0 tracks on frames voiced in both.

    Tracks are truncated to the shorter length; fewer than ``min_voiced``
    common voiced frames is an error, not a silent 0.
    """
    n = min(orig.values.size, anon.values.size)
    a = orig.values[:n]
    b = anon.values[:n]
    both = (a > 0.0) & (b > 0.0)
    count = int(both.sum())
    if count < min_voiced:
        raise ValueError(
            f"insufficient voiced overlap: {count} common voiced frames, need {min_voiced}"
        )
    return pearson(a[both], b[both])


def read_wave_mono(path: str | Path) -> tuple[np.ndarray, int]:
    """Read a 16-bit PCM mono WAV into float64 samples in [-1, 1)."""
    with wave.open(str(path), "rb") as wav:
        if wav.getnchannels() != 1:
            raise ValueError(f"{path}: expected mono, got {wav.getnchannels()} channels")
        if wav.getsampwidth() != 2:
            raise ValueError(f"{path}: expected 16-bit PCM, got {8 * wav.getsampwidth()}-bit")
        rate = wav.getframerate()
        raw = wav.readframes(wav.getnframes())
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return samples, rate


def write_wave_mono(path: str | Path, samples: np.ndarray, sample_rate: int) -> None:
    """Write float samples (clipped to [-1, 1]) as 16-bit PCM mono WAV."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("samples must be mono 1-D")
    pcm = np.clip(np.round(x * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(sample_rate)
        wav.writeframes(pcm.tobytes())
