"""Pseudo-speaker blending: random affine combinations of matched features.

A pseudo speaker is drawn in three steps: pick m reference speakers
uniformly without replacement, draw one standard-normal logit per pick
and softmax them (weights in (0,1), summing to 1), then optionally
extrapolate the weights with scale s:

    w' = w * (s + 1) - s / m

which preserves the sum (affine) while letting weights go negative.
Anonymization matches the source against each picked speaker, blends the
matches with w', and mixes back `preserve` parts of the source.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .featstore import SpeakerPool
from .matcher import knn_match
from .prng import SplitMix64

DEFAULT_M = 4
DEFAULT_K = 4


@dataclass
class BlendConfig:
    m: int = DEFAULT_M
    k: int = DEFAULT_K
    scale: float = 0.0
    preserve: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.scale < 0.0:
            raise ValueError("scale must be >= 0")
        if not 0.0 <= self.preserve <= 1.0:
            raise ValueError("preserve must be in [0, 1]")

    def validate_for_pool(self, pool: SpeakerPool) -> None:
        if self.m > len(pool):
            raise ValueError(f"m={self.m} exceeds pool size {len(pool)}")
        short = [spk for spk, mat in zip(pool.speaker_ids, pool.features) if mat.shape[0] < self.k]
        if short:
            raise ValueError(f"k={self.k} exceeds reference frames of speakers {short}")


@dataclass
class WeightVector:
    speaker_ids: list[str]
    weights: np.ndarray

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if len(self.speaker_ids) != self.weights.shape[0]:
            raise ValueError("speaker_ids and weights length mismatch")
        total = float(self.weights.sum())
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"weights sum to {total}, expected 1")


def softmax(logits: np.ndarray) -> np.ndarray:
    """Max-subtracted softmax; always positive, sums to 1."""
    z = np.asarray(logits, dtype=np.float64)
    e = np.exp(z - z.max())
    return e / e.sum()


def sample_subset(pool: SpeakerPool, m: int, rng: SplitMix64) -> list[str]:
    """m distinct speaker ids, uniform without replacement."""
    if m > len(pool):
        raise ValueError(f"m={m} exceeds pool size {len(pool)}")
    return [pool.speaker_ids[i] for i in rng.sample(len(pool), m)]


def sample_weights(speaker_ids: list[str], rng: SplitMix64) -> WeightVector:
    """Softmax of one standard-normal logit per selected speaker.

    Non-selected speakers simply do not appear, which is numerically
    identical to giving them -inf logits under the softmax.
    """
    logits = np.array([rng.next_gaussian() for _ in speaker_ids])
    return WeightVector(speaker_ids=list(speaker_ids), weights=softmax(logits))


def extrapolate_weights(wv: WeightVector, scale: float) -> WeightVector:
    """Affine widening of the weights; scale 0 is the identity map.

    w'_i = w_i*(s+1) - s/m, computed as w_i + s*(w_i - 1/m) so that both
    fixed points (s=0, and the uniform vector for any s) hold bit-exactly.
    """
    if scale < 0.0:
        raise ValueError("scale must be >= 0")
    m = len(wv.speaker_ids)
    widened = wv.weights + scale * (wv.weights - 1.0 / m)
    return WeightVector(speaker_ids=list(wv.speaker_ids), weights=widened)


def blend(matched: list[np.ndarray], wv: WeightVector) -> np.ndarray:
    """Element-wise affine combination of equally shaped matrices."""
    if len(matched) != len(wv.speaker_ids):
        raise ValueError("number of matrices must equal number of weights")
    shape = matched[0].shape
    for mat in matched[1:]:
        if mat.shape != shape:
            raise ValueError(f"shape mismatch in blend: {mat.shape} vs {shape}")
    out = np.zeros(shape, dtype=np.float64)
    for weight, mat in zip(wv.weights, matched):
        out += weight * np.asarray(mat, dtype=np.float64)
    return out


def preserve(source: np.ndarray, blended: np.ndarray, p: float) -> np.ndarray:
    """Mix p parts source with (1-p) parts blended features."""
    src = np.asarray(source, dtype=np.float64)
    mix = np.asarray(blended, dtype=np.float64)
    if src.shape != mix.shape:
        raise ValueError(f"shape mismatch in preserve: {src.shape} vs {mix.shape}")
    if not 0.0 <= p <= 1.0:
        raise ValueError("preserve factor must be in [0, 1]")
    return p * src + (1.0 - p) * mix


@dataclass
class PseudoSpeaker:
    """One drawn pseudo identity: subset plus raw and widened weights."""

    speaker_ids: list[str]
    raw_weights: np.ndarray
    weights: np.ndarray


def draw_pseudo_speaker(pool: SpeakerPool, cfg: BlendConfig, rng: SplitMix64) -> PseudoSpeaker:
    subset = sample_subset(pool, cfg.m, rng)
    raw = sample_weights(subset, rng)
    widened = extrapolate_weights(raw, cfg.scale)
    return PseudoSpeaker(speaker_ids=subset, raw_weights=raw.weights, weights=widened.weights)


@dataclass
class Provenance:
    """Replay record written alongside every anonymized utterance."""

    stream_seed: int
    m: int
    k: int
    scale: float
    preserve: float
    speaker_ids: list[str]
    raw_weights: list[float]
    weights: list[float]
    extras: dict[str, str] = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [
            f"stream_seed\t{self.stream_seed}",
            f"m\t{self.m}",
            f"k\t{self.k}",
            f"scale\t{self.scale!r}",
            f"preserve\t{self.preserve!r}",
            "speakers\t" + ",".join(self.speaker_ids),
            "weights_raw\t" + ",".join(repr(w) for w in self.raw_weights),
            "weights\t" + ",".join(repr(w) for w in self.weights),
        ]
        for key in sorted(self.extras):
            lines.append(f"{key}\t{self.extras[key]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Provenance":
        fields: dict[str, str] = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            key, _, value = line.partition("\t")
            fields[key] = value
        known = {"stream_seed", "m", "k", "scale", "preserve", "speakers", "weights_raw", "weights"}
        return cls(
            stream_seed=int(fields["stream_seed"]),
            m=int(fields["m"]),
            k=int(fields["k"]),
            scale=float(fields["scale"]),
            preserve=float(fields["preserve"]),
            speaker_ids=fields["speakers"].split(",") if fields["speakers"] else [],
            raw_weights=[float(x) for x in fields["weights_raw"].split(",")],
            weights=[float(x) for x in fields["weights"].split(",")],
            extras={k: v for k, v in fields.items() if k not in known},
        )


def anonymize(
    source: np.ndarray,
    pool: SpeakerPool,
    cfg: BlendConfig,
    *,
    stream_seed: int | None = None,
    pseudo: PseudoSpeaker | None = None,
) -> tuple[np.ndarray, Provenance]:
    """Full blender pipeline for one utterance.

    Pure given (source, pool, cfg, stream_seed): batch drivers derive one
    stream seed per utterance so serial and parallel runs agree bit for
    bit.  A pre-drawn `pseudo` pins the identity instead (speaker-level
    assignment); the stream seed is then only recorded, not consumed.
    """
    src = np.asarray(source)
    if src.ndim != 2 or src.shape[1] != pool.dims:
        raise ValueError(f"source dims {src.shape} incompatible with pool dims {pool.dims}")
    cfg.validate_for_pool(pool)
    if stream_seed is None:
        stream_seed = cfg.seed
    if pseudo is None:
        pseudo = draw_pseudo_speaker(pool, cfg, SplitMix64(stream_seed))

    matches = []
    for spk in pseudo.speaker_ids:
        idx = pool.index_of(spk)
        result = knn_match(
            src, pool.features[idx], cfg.k, reference_unit=pool.unit_rows(idx)
        )
        matches.append(result.matched)
    blended = blend(matches, WeightVector(pseudo.speaker_ids, pseudo.weights))
    output = preserve(src, blended, cfg.preserve)
    record = Provenance(
        stream_seed=stream_seed,
        m=cfg.m,
        k=cfg.k,
        scale=cfg.scale,
        preserve=cfg.preserve,
        speaker_ids=list(pseudo.speaker_ids),
        raw_weights=[float(w) for w in pseudo.raw_weights],
        weights=[float(w) for w in pseudo.weights],
    )
    return output, record
