"""Adapter settings: which encoder variant to load, which layer to tap,
where the checkpoints live, and the audio rate everything is pinned to."""

from __future__ import annotations

from dataclasses import dataclass, field

# Default tap depth per encoder variant.  Shallow layers carry more
# speaker-independent phonetic detail; these depths keep the same relative
# position in both stacks.  Exposed as a flag because it is a tuning knob,
# not a law.
VARIANT_LAYERS = {"base": 3, "large": 6}

DEFAULT_SAMPLE_RATE = 16_000


@dataclass
class AdapterConfig:
    """Settings shared by extraction, vocoding, and the batch driver.

    ``layer`` indexes the encoder's hidden-state stack: 0 is the
    convolutional front-end output, i the output of transformer block i.
    ``None`` picks the variant default.  Whether the index is valid for a
    concrete checkpoint is only known once the checkpoint is loaded, so that
    check happens at load time, not here.
    """

    encoder_checkpoint: str = ""
    vocoder_checkpoint: str = ""
    variant: str = "base"
    layer: int | None = None
    sample_rate: int = DEFAULT_SAMPLE_RATE
    workers: int = field(default=1)

    def __post_init__(self) -> None:
        if self.variant not in VARIANT_LAYERS:
            raise ValueError(
                f"unknown encoder variant {self.variant!r}; expected one of "
                f"{sorted(VARIANT_LAYERS)}"
            )
        if self.layer is None:
            self.layer = VARIANT_LAYERS[self.variant]
        if self.layer < 0:
            raise ValueError(f"layer index must be >= 0, got {self.layer}")
        if self.sample_rate <= 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
