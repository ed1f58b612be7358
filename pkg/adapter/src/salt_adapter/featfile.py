"""Feature-matrix files in the engine's exchange format.

The byte layout is the contract between this adapter and the engine — the
two packages share no code, only these bytes:

    offset 0   8 bytes   magic ``SALTFEAT``
    offset 8   u32 LE    format version (currently 1)
    offset 12  u32 LE    dims d  (>= 1)
    offset 16  u64 LE    frames T (>= 0)
    offset 24  T*d f32   payload, little-endian, row-major
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

FEATURE_MAGIC = b"SALTFEAT"
FORMAT_VERSION = 1
FEATURE_SUFFIX = ".saltfeat"

_HEADER = struct.Struct("<8sIIQ")


class FeatureFileError(ValueError):
    """Malformed or mismatched feature bytes."""


def write_features(data: np.ndarray, destination: str | Path) -> None:
    arr = np.asarray(data)
    if arr.ndim != 2:
        raise ValueError(f"feature matrix must be 2-D, got shape {arr.shape}")
    if arr.shape[1] < 1:
        raise ValueError("feature matrix needs at least one dimension")
    arr = np.ascontiguousarray(arr, dtype=np.float32)
    if not np.isfinite(arr).all():
        raise ValueError("feature matrix contains non-finite values")
    frames, dims = arr.shape
    header = _HEADER.pack(FEATURE_MAGIC, FORMAT_VERSION, dims, frames)
    with open(destination, "wb") as fh:
        fh.write(header + arr.tobytes(order="C"))


def read_features(source: str | Path) -> np.ndarray:
    with open(source, "rb") as fh:
        buf = fh.read()
    if len(buf) < _HEADER.size:
        raise FeatureFileError(f"{source}: corrupt length: truncated header")
    magic, version, dims, frames = _HEADER.unpack_from(buf, 0)
    if magic != FEATURE_MAGIC:
        raise FeatureFileError(f"{source}: not a feature file")
    if version != FORMAT_VERSION:
        raise FeatureFileError(
            f"{source}: version mismatch: got {version}, support {FORMAT_VERSION}"
        )
    if dims < 1:
        raise FeatureFileError(f"{source}: invalid dims {dims}")
    expected = _HEADER.size + 4 * dims * frames
    if len(buf) != expected:
        raise FeatureFileError(
            f"{source}: corrupt length: expected {expected} bytes, got {len(buf)}"
        )
    payload = np.frombuffer(buf, dtype="<f4", offset=_HEADER.size)
    arr = payload.reshape(frames, dims).astype(np.float32, copy=True)
    if not np.isfinite(arr).all():
        raise FeatureFileError(f"{source}: feature payload contains non-finite values")
    return arr
