"""Feature-matrix serialization, pool manifests, and reference pools.

The on-disk layout is the exchange boundary of the whole toolkit: any
producer (including non-Python ones) that writes these bytes can feed
the engine.  Layout of a feature file:

    offset 0   8 bytes   magic ``SALTFEAT``
    offset 8   u32 LE    format version (currently 1)
    offset 12  u32 LE    dims d  (>= 1)
    offset 16  u64 LE    frames T (>= 0)
    offset 24  T*d f32   payload, little-endian, row-major

A pool archive concatenates feature files for N speakers behind a small
index so one pool is one file (magic ``SALTPOOL``).
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .prng import SplitMix64

FEATURE_MAGIC = b"SALTFEAT"
POOL_MAGIC = b"SALTPOOL"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<8sIIQ")


class FeatureFileError(ValueError):
    """Malformed or mismatched feature/pool bytes."""


def check_features(data: np.ndarray) -> np.ndarray:
    """Validate and canonicalize a feature matrix.

    Returns a C-contiguous float32 view/copy of shape (T, d) with d >= 1
    and all values finite.
    """
    arr = np.asarray(data)
    if arr.ndim != 2:
        raise ValueError(f"feature matrix must be 2-D, got shape {arr.shape}")
    if arr.shape[1] < 1:
        raise ValueError("feature matrix needs at least one dimension")
    arr = np.ascontiguousarray(arr, dtype=np.float32)
    if not np.isfinite(arr).all():
        raise ValueError("feature matrix contains non-finite values")
    return arr


def features_to_bytes(data: np.ndarray) -> bytes:
    arr = check_features(data)
    frames, dims = arr.shape
    header = _HEADER.pack(FEATURE_MAGIC, FORMAT_VERSION, dims, frames)
    return header + arr.tobytes(order="C")


def features_from_bytes(buf: bytes) -> np.ndarray:
    if len(buf) < _HEADER.size:
        raise FeatureFileError("corrupt length: truncated header")
    magic, version, dims, frames = _HEADER.unpack_from(buf, 0)
    if magic != FEATURE_MAGIC:
        raise FeatureFileError("not a feature file")
    if version != FORMAT_VERSION:
        raise FeatureFileError(f"version mismatch: got {version}, support {FORMAT_VERSION}")
    if dims < 1:
        raise FeatureFileError(f"invalid dims {dims}")
    expected = _HEADER.size + 4 * dims * frames
    if len(buf) != expected:
        raise FeatureFileError(f"corrupt length: expected {expected} bytes, got {len(buf)}")
    payload = np.frombuffer(buf, dtype="<f4", offset=_HEADER.size)
    arr = payload.reshape(frames, dims).astype(np.float32, copy=True)
    if not np.isfinite(arr).all():
        raise FeatureFileError("feature payload contains non-finite values")
    return arr


def write_features(data: np.ndarray, destination: str | Path) -> None:
    """Write one feature matrix; rejects invalid input before any I/O."""
    blob = features_to_bytes(data)
    with open(destination, "wb") as fh:
        fh.write(blob)


def read_features(source: str | Path) -> np.ndarray:
    with open(source, "rb") as fh:
        return features_from_bytes(fh.read())


# ---------------------------------------------------------------------------
# Manifests

MANIFEST_DEFAULT_SPEAKERS = 50
MANIFEST_DEFAULT_UTTERANCES = 50


@dataclass
class PoolManifest:
    """Speaker -> feature-file listing plus pool sampling parameters.

    Text form is line oriented: ``#key<TAB>value`` header lines for the
    sampling parameters, then one ``speaker_id<TAB>path`` line per file.
    Relative paths are resolved against the manifest's directory.
    """

    entries: list[tuple[str, list[str]]] = field(default_factory=list)
    n_speakers: int = MANIFEST_DEFAULT_SPEAKERS
    n_utterances: int = MANIFEST_DEFAULT_UTTERANCES
    seed: int = 0

    def speaker_ids(self) -> list[str]:
        return [spk for spk, _ in self.entries]


def read_manifest(path: str | Path) -> PoolManifest:
    path = Path(path)
    base = path.parent
    manifest = PoolManifest(entries=[])
    by_speaker: dict[str, list[str]] = {}
    order: list[str] = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition("\t")
            if key == "n_speakers":
                manifest.n_speakers = int(value)
            elif key == "n_utterances":
                manifest.n_utterances = int(value)
            elif key == "seed":
                manifest.seed = int(value)
            else:
                raise ValueError(f"{path}:{lineno}: unknown header key {key!r}")
            continue
        speaker, sep, file_path = line.partition("\t")
        if not sep or not speaker or not file_path:
            raise ValueError(f"{path}:{lineno}: expected 'speaker<TAB>path'")
        resolved = str((base / file_path) if not Path(file_path).is_absolute() else file_path)
        if speaker not in by_speaker:
            by_speaker[speaker] = []
            order.append(speaker)
        by_speaker[speaker].append(resolved)
    manifest.entries = [(spk, by_speaker[spk]) for spk in order]
    return manifest


def write_manifest(manifest: PoolManifest, path: str | Path) -> None:
    lines = [
        f"#n_speakers\t{manifest.n_speakers}",
        f"#n_utterances\t{manifest.n_utterances}",
        f"#seed\t{manifest.seed}",
    ]
    for speaker, paths in manifest.entries:
        for p in paths:
            lines.append(f"{speaker}\t{p}")
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Speaker pools


@dataclass
class SpeakerPool:
    """Reference speakers with concatenated features and cached norms.

    Immutable after construction; safe to share read-only across workers.
    """

    speaker_ids: list[str]
    features: list[np.ndarray]
    row_norms: list[np.ndarray]
    dims: int
    _unit_cache: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if len(set(self.speaker_ids)) != len(self.speaker_ids):
            raise ValueError("duplicate speaker ids in pool")
        if len(self.features) != len(self.speaker_ids) or len(self.row_norms) != len(self.speaker_ids):
            raise ValueError("pool field lengths disagree")
        for spk, mat in zip(self.speaker_ids, self.features):
            if mat.shape[1] != self.dims:
                raise ValueError(f"speaker {spk!r} has dims {mat.shape[1]}, pool dims {self.dims}")
            if mat.shape[0] < 1:
                raise ValueError(f"speaker {spk!r} has no frames")

    def __len__(self) -> int:
        return len(self.speaker_ids)

    def index_of(self, speaker_id: str) -> int:
        return self.speaker_ids.index(speaker_id)

    def unit_rows(self, index: int) -> np.ndarray:
        """Row-normalized reference matrix in float64, cached per speaker.

        Zero-norm rows normalize to zero rows, which makes their cosine
        similarity against anything exactly 0.
        """
        cached = self._unit_cache.get(index)
        if cached is None:
            mat = self.features[index].astype(np.float64)
            norms = self.row_norms[index]
            safe = np.where(norms == 0.0, 1.0, norms)
            cached = mat / safe[:, None]
            self._unit_cache[index] = cached
        return cached


def pool_from_members(speaker_ids: list[str], matrices: list[np.ndarray]) -> SpeakerPool:
    dims = matrices[0].shape[1]
    norms = [np.linalg.norm(m.astype(np.float64), axis=1) for m in matrices]
    return SpeakerPool(speaker_ids=speaker_ids, features=matrices, row_norms=norms, dims=dims)


def build_pool(manifest: PoolManifest, rng: SplitMix64 | None = None) -> SpeakerPool:
    """Sample speakers and utterances per the manifest and load the pool.

    One splitmix64 stream drives both sampling stages: first the speaker
    subset, then each selected speaker's utterances, in selection order.
    """
    available = len(manifest.entries)
    if manifest.n_speakers > available:
        raise ValueError(
            f"insufficient speakers: need {manifest.n_speakers}, manifest has {available}"
        )
    if rng is None:
        rng = SplitMix64(manifest.seed)

    picks = rng.sample(available, manifest.n_speakers)
    speaker_ids: list[str] = []
    matrices: list[np.ndarray] = []
    pool_dims: int | None = None
    first_file: str | None = None
    for pick in picks:
        speaker, paths = manifest.entries[pick]
        if manifest.n_utterances > len(paths):
            raise ValueError(
                f"insufficient utterances for speaker {speaker!r}: "
                f"need {manifest.n_utterances}, have {len(paths)}"
            )
        chosen = rng.sample(len(paths), manifest.n_utterances)
        parts = []
        for idx in chosen:
            mat = read_features(paths[idx])
            if pool_dims is None:
                pool_dims = mat.shape[1]
                first_file = paths[idx]
            elif mat.shape[1] != pool_dims:
                raise ValueError(
                    f"dims mismatch: {paths[idx]} has {mat.shape[1]}, "
                    f"{first_file} has {pool_dims}"
                )
            parts.append(mat)
        speaker_ids.append(speaker)
        matrices.append(np.concatenate(parts, axis=0))
    return pool_from_members(speaker_ids, matrices)


_POOL_HEADER = struct.Struct("<8sII")
_INDEX_ENTRY = struct.Struct("<QQ")


def save_pool(pool: SpeakerPool, destination: str | Path) -> None:
    """Archive: pool header, per-speaker index, concatenated feature blobs."""
    blobs = [features_to_bytes(m) for m in pool.features]
    ids = [spk.encode("utf-8") for spk in pool.speaker_ids]
    index_size = sum(2 + len(i) + _INDEX_ENTRY.size for i in ids)
    offset = _POOL_HEADER.size + index_size

    out = io.BytesIO()
    out.write(_POOL_HEADER.pack(POOL_MAGIC, FORMAT_VERSION, len(pool)))
    for ident, blob in zip(ids, blobs):
        out.write(struct.pack("<H", len(ident)))
        out.write(ident)
        out.write(_INDEX_ENTRY.pack(offset, len(blob)))
        offset += len(blob)
    for blob in blobs:
        out.write(blob)
    Path(destination).write_bytes(out.getvalue())


def load_pool(source: str | Path) -> SpeakerPool:
    buf = Path(source).read_bytes()
    if len(buf) < _POOL_HEADER.size:
        raise FeatureFileError("corrupt length: truncated pool header")
    magic, version, count = _POOL_HEADER.unpack_from(buf, 0)
    if magic != POOL_MAGIC:
        raise FeatureFileError("not a pool file")
    if version != FORMAT_VERSION:
        raise FeatureFileError(f"version mismatch: got {version}, support {FORMAT_VERSION}")

    pos = _POOL_HEADER.size
    entries: list[tuple[str, int, int]] = []
    for _ in range(count):
        (id_len,) = struct.unpack_from("<H", buf, pos)
        pos += 2
        ident = buf[pos : pos + id_len].decode("utf-8")
        pos += id_len
        offset, size = _INDEX_ENTRY.unpack_from(buf, pos)
        pos += _INDEX_ENTRY.size
        entries.append((ident, offset, size))

    speaker_ids = []
    matrices = []
    for ident, offset, size in entries:
        if offset + size > len(buf):
            raise FeatureFileError("corrupt length: pool member out of range")
        matrices.append(features_from_bytes(buf[offset : offset + size]))
        speaker_ids.append(ident)
    if not matrices:
        raise FeatureFileError("pool archive has no members")
    dims = matrices[0].shape[1]
    for ident, mat in zip(speaker_ids, matrices):
        if mat.shape[1] != dims:
            raise FeatureFileError(f"pool member {ident!r} dims {mat.shape[1]} != {dims}")
    return pool_from_members(speaker_ids, matrices)
