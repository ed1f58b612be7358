"""16-bit PCM mono WAV reading and writing via the stdlib ``wave`` module.

The adapter does not resample or downmix; inputs that need either get an
error saying so, because silently altering audio would corrupt the framing
math downstream.
"""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np


def read_wave_mono(path: str | Path) -> tuple[np.ndarray, int]:
    """Read a 16-bit PCM mono WAV into float32 samples in [-1, 1)."""
    try:
        handle = wave.open(str(path), "rb")
    except (wave.Error, EOFError) as exc:
        raise ValueError(f"{path}: unreadable audio ({exc})") from None
    with handle as wav:
        if wav.getnchannels() != 1:
            raise ValueError(
                f"{path}: expected mono, got {wav.getnchannels()} channels; "
                "downmix to one channel first"
            )
        if wav.getsampwidth() != 2:
            raise ValueError(
                f"{path}: expected 16-bit PCM, got {8 * wav.getsampwidth()}-bit"
            )
        rate = wav.getframerate()
        raw = wav.readframes(wav.getnframes())
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float32) / 32768.0
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
