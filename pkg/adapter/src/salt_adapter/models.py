"""Checkpoint loading and model-geometry discovery.

Feature dims, frame rate, and layer count are read off the loaded
checkpoint's own config instead of being hardcoded per variant, so a
checkpoint with unexpected geometry fails loudly at load time rather than
producing silently misshapen artifacts.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path

import torch
from transformers import SpeechT5HifiGan, WavLMModel
from transformers.utils import logging as hf_logging

log = logging.getLogger(__name__)

# progress bars from checkpoint IO would interleave with piped CLI output
hf_logging.disable_progress_bar()


def load_encoder(checkpoint: str | Path) -> WavLMModel:
    path = Path(checkpoint)
    if not path.is_dir():
        raise FileNotFoundError(f"encoder checkpoint not found: {checkpoint}")
    model = WavLMModel.from_pretrained(str(path)).eval()
    log.info(
        "encoder: %d layers, hidden %d, hop %d samples",
        model.config.num_hidden_layers,
        model.config.hidden_size,
        encoder_hop(model),
    )
    return model


def load_vocoder(checkpoint: str | Path) -> SpeechT5HifiGan:
    path = Path(checkpoint)
    if not path.is_dir():
        raise FileNotFoundError(f"vocoder checkpoint not found: {checkpoint}")
    model = SpeechT5HifiGan.from_pretrained(str(path)).eval()
    log.info(
        "vocoder: in dims %d, hop %d samples", model.config.model_in_dim, vocoder_hop(model)
    )
    return model


def encoder_hop(model: WavLMModel) -> int:
    """Samples consumed per output frame (product of the front-end strides)."""
    return math.prod(model.config.conv_stride)


def encoder_min_samples(model: WavLMModel) -> int:
    """Shortest input that still yields one frame.

    Inverts the front-end's ``(L - kernel) // stride + 1`` chain from an
    output length of 1.
    """
    n = 1
    for kernel, stride in zip(
        reversed(model.config.conv_kernel), reversed(model.config.conv_stride)
    ):
        n = (n - 1) * stride + kernel
    return n


def check_layer(model: WavLMModel, layer: int) -> None:
    """The tap index must exist in this checkpoint's hidden-state stack."""
    depth = model.config.num_hidden_layers
    if not 0 <= layer <= depth:
        raise ValueError(
            f"layer {layer} out of range for this checkpoint (valid: 0..{depth})"
        )


def vocoder_hop(model: SpeechT5HifiGan) -> int:
    """Samples emitted per input frame (product of the upsampling rates)."""
    return math.prod(model.config.upsample_rates)


@torch.no_grad()
def encode(model: WavLMModel, samples, layer: int) -> torch.Tensor:
    """Run the encoder on one mono waveform, returning the (T, d) tap."""
    wave = torch.as_tensor(samples, dtype=torch.float32).unsqueeze(0)
    states = model(wave, output_hidden_states=True).hidden_states
    return states[layer][0]


@torch.no_grad()
def decode(model: SpeechT5HifiGan, features: torch.Tensor) -> torch.Tensor:
    """Run the vocoder on one (T, d) feature matrix, returning samples."""
    return model(features)
