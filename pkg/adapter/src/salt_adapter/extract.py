"""Waveform -> feature-file extraction, single files and manifest batches."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from transformers import WavLMModel

from .audio import read_wave_mono
from .config import AdapterConfig
from .featfile import FEATURE_SUFFIX, FeatureFileError, write_features
from .models import check_layer, encode, encoder_min_samples, load_encoder

log = logging.getLogger(__name__)


def extract_features(
    audio_path: str | Path, cfg: AdapterConfig, *, encoder: WavLMModel | None = None
) -> np.ndarray:
    """Latent features for one utterance as a (T, d) float32 matrix.

    T follows from the audio length and the encoder's hop; d is the
    checkpoint's hidden size.  Pass ``encoder`` to reuse an already-loaded
    model across calls.
    """
    if encoder is None:
        encoder = load_encoder(cfg.encoder_checkpoint)
    check_layer(encoder, cfg.layer)

    samples, rate = read_wave_mono(audio_path)
    if rate != cfg.sample_rate:
        raise ValueError(
            f"{audio_path}: sample rate {rate} Hz, expected {cfg.sample_rate}; "
            "resample before extraction"
        )
    need = encoder_min_samples(encoder)
    if samples.size < need:
        raise ValueError(
            f"{audio_path}: audio too short ({samples.size} samples); "
            f"the encoder needs at least {need}"
        )
    return encode(encoder, samples, cfg.layer).numpy().astype(np.float32)


def extract_file(
    audio_path: str | Path,
    out_path: str | Path,
    cfg: AdapterConfig,
    *,
    encoder: WavLMModel | None = None,
) -> None:
    write_features(extract_features(audio_path, cfg, encoder=encoder), out_path)


# ---------------------------------------------------------------------------
# Batch driver


@dataclass
class BatchResult:
    """Outcome of one manifest run; order follows the input manifest."""

    written: list[tuple[str, Path]] = field(default_factory=list)
    failures: list[tuple[str, str]] = field(default_factory=list)


def read_audio_manifest(path: str | Path) -> list[tuple[str, Path]]:
    """Lines: ``speaker<TAB>audio_path``; relative paths sit next to the file."""
    base = Path(path).parent
    rows: list[tuple[str, Path]] = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        speaker, sep, audio = line.partition("\t")
        if not sep or not speaker or not audio:
            raise ValueError(f"{path}:{lineno}: expected 'speaker<TAB>audio_path'")
        audio_path = Path(audio)
        rows.append((speaker, audio_path if audio_path.is_absolute() else base / audio_path))
    return rows


def batch_extract(
    manifest_path: str | Path, out_dir: str | Path, cfg: AdapterConfig
) -> BatchResult:
    """Extract every manifest entry into ``out_dir`` plus a feature manifest.

    Failures are collected, not fatal: the run keeps going and the caller
    decides what a partial result is worth.  Output naming is
    ``speaker__stem`` so names stay unique per speaker and the speaker id
    survives as the leading stem segment.  Re-runs are byte-identical
    because extraction is deterministic and workers only change scheduling.
    """
    rows = read_audio_manifest(manifest_path)
    if not rows:
        raise ValueError(f"{manifest_path}: no utterances listed")
    encoder = load_encoder(cfg.encoder_checkpoint)
    check_layer(encoder, cfg.layer)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def one(row: tuple[str, Path]) -> Path:
        speaker, audio_path = row
        target = out / f"{speaker}__{audio_path.stem}{FEATURE_SUFFIX}"
        extract_file(audio_path, target, cfg, encoder=encoder)
        return target

    result = BatchResult()
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        futures = [pool.submit(one, row) for row in rows]
        for (speaker, audio_path), future in zip(rows, futures):
            try:
                result.written.append((speaker, future.result()))
            except (ValueError, OSError, FeatureFileError) as exc:
                log.warning("skipping %s: %s", audio_path, exc)
                result.failures.append((str(audio_path), str(exc)))
    return result


def write_feature_manifest(result: BatchResult, path: str | Path) -> None:
    """Speaker/path manifest for the written files, relative to the manifest."""
    base = Path(path).parent
    lines = []
    for speaker, feat_path in result.written:
        try:
            shown: Path | str = feat_path.relative_to(base)
        except ValueError:
            shown = feat_path
        lines.append(f"{speaker}\t{shown}")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))
