"""Seeded synthetic corpora: Gaussian speaker clusters in feature space.

Each synthetic speaker is a cluster center; its "utterances" are frames
scattered around that center.  Useful for experiments and end-to-end
tests where real encoder output is unavailable.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .featstore import PoolManifest, SpeakerPool, pool_from_members, write_features, write_manifest
from .prng import SplitMix64, substream_seed


def gaussian_matrix(rng: SplitMix64, rows: int, cols: int) -> np.ndarray:
    """(rows, cols) float64 matrix of standard normals drawn row-major."""
    out = np.empty((rows, cols), dtype=np.float64)
    flat = out.reshape(-1)
    for i in range(flat.size):
        flat[i] = rng.next_gaussian()
    return out


def speaker_centers(n_speakers: int, dims: int, seed: int, spread: float = 3.0) -> np.ndarray:
    rng = SplitMix64(substream_seed(seed, 0))
    return gaussian_matrix(rng, n_speakers, dims) * spread


def utterance_features(
    center: np.ndarray, frames: int, rng: SplitMix64, jitter: float = 0.25
) -> np.ndarray:
    """Frames scattered around a cluster center, as float32 rows."""
    noise = gaussian_matrix(rng, frames, center.shape[0]) * jitter
    return (center[None, :] + noise).astype(np.float32)


def make_pool(
    n_speakers: int = 16,
    dims: int = 32,
    frames_per_speaker: int = 64,
    seed: int = 0,
    spread: float = 3.0,
    jitter: float = 0.25,
) -> SpeakerPool:
    """Reference pool of ``n_speakers`` Gaussian clusters."""
    centers = speaker_centers(n_speakers, dims, seed, spread)
    speaker_ids = [f"S{i:03d}" for i in range(n_speakers)]
    features = []
    for i in range(n_speakers):
        rng = SplitMix64(substream_seed(seed, i + 1))
        features.append(utterance_features(centers[i], frames_per_speaker, rng, jitter))
    return pool_from_members(speaker_ids, features)


def make_corpus(
    out_dir: str | Path,
    n_speakers: int = 4,
    n_utterances: int = 3,
    frames: int = 40,
    dims: int = 16,
    seed: int = 0,
    spread: float = 3.0,
    jitter: float = 0.25,
) -> Path:
    """Write a corpus of feature files plus its manifest; returns the
    manifest path.  File stems are ``<speaker>_<utterance>`` so the
    per-speaker CLI mode can group them."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    centers = speaker_centers(n_speakers, dims, seed, spread)
    entries: list[tuple[str, list[str]]] = []
    stream = 1
    for i in range(n_speakers):
        speaker = f"SPK{i:02d}"
        paths = []
        for u in range(n_utterances):
            rng = SplitMix64(substream_seed(seed, stream))
            stream += 1
            feats = utterance_features(centers[i], frames, rng, jitter)
            name = f"{speaker}_{u:03d}.saltfeat"
            write_features(feats, out / name)
            paths.append(name)
        entries.append((speaker, paths))
    manifest_path = out / "manifest.tsv"
    manifest = PoolManifest(
        entries=entries, n_speakers=n_speakers, n_utterances=n_utterances, seed=seed
    )
    write_manifest(manifest, manifest_path)
    return manifest_path
