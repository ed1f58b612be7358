"""Feature-file -> waveform resynthesis."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from transformers import SpeechT5HifiGan

from .audio import write_wave_mono
from .config import AdapterConfig
from .featfile import read_features
from .models import decode, load_vocoder


def vocode_features(
    features: np.ndarray, cfg: AdapterConfig, *, vocoder: SpeechT5HifiGan | None = None
) -> np.ndarray:
    """Waveform samples for one (T, d) feature matrix.

    Output length is T times the vocoder's hop, give or take the edge
    padding of the upsampling stack — under one frame either way.
    """
    if vocoder is None:
        vocoder = load_vocoder(cfg.vocoder_checkpoint)
    arr = np.asarray(features, dtype=np.float32)
    if arr.ndim != 2:
        raise ValueError(f"feature matrix must be 2-D, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError("zero-frame feature matrix; nothing to vocode")
    expected = vocoder.config.model_in_dim
    if arr.shape[1] != expected:
        raise ValueError(
            f"feature dims {arr.shape[1]} do not match the vocoder (expects {expected})"
        )
    return decode(vocoder, torch.from_numpy(arr)).numpy().astype(np.float32)


def vocode_file(
    features_path: str | Path,
    out_path: str | Path,
    cfg: AdapterConfig,
    *,
    vocoder: SpeechT5HifiGan | None = None,
) -> None:
    samples = vocode_features(read_features(features_path), cfg, vocoder=vocoder)
    write_wave_mono(out_path, samples, cfg.sample_rate)
