"""Tiny, randomly initialized checkpoints for tests and demos.

Real checkpoints are hundreds of megabytes and external to this repo.  The
tiny variants keep the exact architectures — and therefore the framing
arithmetic: the encoder front-end keeps its standard kernel/stride stack
(320 samples per frame at 16 kHz), and the vocoder upsampling multiplies
back by the same factor — while shrinking widths and depths so a checkpoint
is a few hundred kilobytes and a forward pass takes milliseconds.  Weights
are seeded but meaningless; anything testing audible quality needs the real
artifacts.
"""

from __future__ import annotations

from pathlib import Path

import torch
from transformers import SpeechT5HifiGan, SpeechT5HifiGanConfig, WavLMConfig, WavLMModel

TINY_HIDDEN = 32
TINY_LAYERS = 4

# product must equal the encoder front-end stride product so that
# extract -> vocode round trips preserve duration
TINY_UPSAMPLE_RATES = (5, 4, 4, 4)


def tiny_encoder_config(hidden: int = TINY_HIDDEN, layers: int = TINY_LAYERS) -> WavLMConfig:
    return WavLMConfig(
        hidden_size=hidden,
        num_hidden_layers=layers,
        num_attention_heads=2,
        intermediate_size=2 * hidden,
        conv_dim=(16,) * 7,
        num_conv_pos_embeddings=16,
        num_conv_pos_embedding_groups=4,
    )


def tiny_vocoder_config(dims: int = TINY_HIDDEN) -> SpeechT5HifiGanConfig:
    return SpeechT5HifiGanConfig(
        model_in_dim=dims,
        sampling_rate=16_000,
        upsample_rates=TINY_UPSAMPLE_RATES,
        upsample_kernel_sizes=tuple(2 * r for r in TINY_UPSAMPLE_RATES),
        upsample_initial_channel=32,
        resblock_kernel_sizes=(3,),
        resblock_dilation_sizes=((1, 3),),
    )


def save_tiny_checkpoints(
    out_dir: str | Path, *, seed: int = 0, hidden: int = TINY_HIDDEN, layers: int = TINY_LAYERS
) -> tuple[Path, Path]:
    """Write seeded encoder/ and vocoder/ checkpoints under ``out_dir``."""
    out = Path(out_dir)
    encoder_dir = out / "encoder"
    vocoder_dir = out / "vocoder"

    torch.manual_seed(seed)
    WavLMModel(tiny_encoder_config(hidden, layers)).eval().save_pretrained(encoder_dir)
    torch.manual_seed(seed + 1)
    SpeechT5HifiGan(tiny_vocoder_config(hidden)).eval().save_pretrained(vocoder_dir)
    return encoder_dir, vocoder_dir
