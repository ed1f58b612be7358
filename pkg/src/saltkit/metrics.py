"""Privacy and utility metrics over externally produced scores/embeddings.

Everything here is a pure function of its inputs.  The EER sweep and the
distinctiveness gain are pinned algorithms (see function docstrings);
similarity is cosine over embeddings, so absolute numbers are comparable
only between runs of this toolkit, not with PLDA-based protocols.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .matcher import unit_rows

log = logging.getLogger(__name__)

# Dataset weights used for the six dev/test evaluation subsets
# (LibriSpeech f/m 0.25 each, VCTK-diff f/m 0.20 each, VCTK-comm f/m 0.05 each).
VPC_WEIGHTS = (0.25, 0.25, 0.20, 0.20, 0.05, 0.05)


@dataclass
class ScoreSet:
    genuine: np.ndarray
    impostor: np.ndarray

    def __post_init__(self) -> None:
        self.genuine = np.asarray(self.genuine, dtype=np.float64)
        self.impostor = np.asarray(self.impostor, dtype=np.float64)
        if self.genuine.size == 0 or self.impostor.size == 0:
            raise ValueError("EER needs non-empty genuine and impostor score lists")
        if not (np.isfinite(self.genuine).all() and np.isfinite(self.impostor).all()):
            raise ValueError("scores must be finite")


def read_scores(path: str | Path) -> ScoreSet:
    """Parse ``label<TAB>score`` lines, label in {genuine, impostor}."""
    genuine: list[float] = []
    impostor: list[float] = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        label, sep, value = line.partition("\t")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected 'label<TAB>score'")
        try:
            score = float(value)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: bad score {value!r}") from None
        if label == "genuine":
            genuine.append(score)
        elif label == "impostor":
            impostor.append(score)
        else:
            raise ValueError(f"{path}:{lineno}: unknown label {label!r}")
    return ScoreSet(genuine=np.array(genuine), impostor=np.array(impostor))


def compute_eer(scores: ScoreSet) -> tuple[float, float]:
    """Equal error rate and its operating threshold.

    Candidate thresholds are the midpoints of the sorted unique scores,
    plus one sentinel below and above everything.  FRR(t) is the fraction
    of genuine scores < t, FAR(t) the fraction of impostor scores >= t.
    If no candidate makes them exactly equal, the crossing is linearly
    interpolated between the bracketing candidates.  The result depends
    only on score ranks, hence is invariant under strictly increasing
    transforms.
    """
    uniq = np.unique(np.concatenate([scores.genuine, scores.impostor]))
    mids = (uniq[:-1] + uniq[1:]) / 2.0
    cands = np.concatenate([[uniq[0] - 1.0], mids, [uniq[-1] + 1.0]])

    sorted_gen = np.sort(scores.genuine)
    sorted_imp = np.sort(scores.impostor)
    frr = np.searchsorted(sorted_gen, cands, side="left") / sorted_gen.size
    far = 1.0 - np.searchsorted(sorted_imp, cands, side="left") / sorted_imp.size

    diff = frr - far  # non-decreasing in t
    exact = np.flatnonzero(diff == 0.0)
    if exact.size:
        j = int(exact[0])
        return (frr[j] + far[j]) / 2.0, float(cands[j])

    j = int(np.flatnonzero(diff > 0.0)[0])  # sentinels guarantee a sign change
    a = j - 1
    alpha = (far[a] - frr[a]) / ((frr[j] - frr[a]) - (far[j] - far[a]))
    eer = frr[a] + alpha * (frr[j] - frr[a])
    threshold = cands[a] + alpha * (cands[j] - cands[a])
    return float(eer), float(threshold)


def pearson(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson product-moment correlation coefficient."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("sequences must be 1-D and equally long")
    if x.size < 2:
        raise ValueError("need at least 2 points")
    dx = x - x.mean()
    dy = y - y.mean()
    vx = float(dx @ dx)
    vy = float(dy @ dy)
    if vx == 0.0 or vy == 0.0:
        raise ValueError("degenerate sequence: zero variance")
    return float((dx @ dy) / np.sqrt(vx * vy))


@dataclass
class SimilarityMatrix:
    """Speaker-by-speaker mean cosine similarity between two embedding sets."""

    ids: list[str]
    entries: np.ndarray  # (n, n) float64; rows index set A, columns set B

    def __post_init__(self) -> None:
        self.entries = np.asarray(self.entries, dtype=np.float64)
        n = len(self.ids)
        if self.entries.shape != (n, n):
            raise ValueError(f"entries shape {self.entries.shape} != ({n}, {n})")
        if not np.isfinite(self.entries).all():
            raise ValueError("similarity entries must be finite")


def similarity_matrix(
    emb_a: dict[str, np.ndarray], emb_b: dict[str, np.ndarray]
) -> SimilarityMatrix:
    """Entry (i, j) = mean cosine similarity over all cross pairs of
    speaker i's embeddings in A and speaker j's in B.  Speakers are
    ordered by sorted id."""
    if set(emb_a) != set(emb_b):
        only_a = sorted(set(emb_a) - set(emb_b))
        only_b = sorted(set(emb_b) - set(emb_a))
        raise ValueError(f"speaker id sets differ (only in A: {only_a}, only in B: {only_b})")
    ids = sorted(emb_a)
    if not ids:
        raise ValueError("no speakers given")
    units_a = [unit_rows(np.atleast_2d(emb_a[s])) for s in ids]
    units_b = [unit_rows(np.atleast_2d(emb_b[s])) for s in ids]
    n = len(ids)
    entries = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(n):
            entries[i, j] = float((units_a[i] @ units_b[j].T).mean())
    return SimilarityMatrix(ids=ids, entries=entries)


def diag_dominance(matrix: SimilarityMatrix) -> float:
    """Absolute gap between the mean diagonal and mean off-diagonal entry."""
    n = len(matrix.ids)
    if n < 2:
        raise ValueError("diagonal dominance needs n >= 2 speakers")
    ent = matrix.entries
    diag_mean = float(np.trace(ent)) / n
    off_mean = float(ent.sum() - np.trace(ent)) / (n * (n - 1))
    return abs(diag_mean - off_mean)


def gain_vd(m_anon_anon: SimilarityMatrix, m_orig_orig: SimilarityMatrix) -> float:
    """Voice-distinctiveness gain in dB: how much diagonal dominance the
    anonymized similarity matrix keeps relative to the original one."""
    if len(m_anon_anon.ids) != len(m_orig_orig.ids):
        raise ValueError("matrices must cover the same number of speakers")
    dd_orig = diag_dominance(m_orig_orig)
    dd_anon = diag_dominance(m_anon_anon)
    if dd_orig == 0.0:
        raise ValueError("original matrix has no diagonal dominance")
    if dd_anon == 0.0:
        log.warning("anonymized matrix has no diagonal dominance; gain is -inf")
        return float("-inf")
    return float(10.0 * np.log10(dd_anon / dd_orig))


def weighted_average(values, weights) -> float:
    v = np.asarray(values, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if v.shape != w.shape or v.ndim != 1:
        raise ValueError("values and weights must be 1-D and equally long")
    total = float(w.sum())
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"weights sum to {total}, expected 1")
    return float(v @ w)


def pca_project(
    embeddings: np.ndarray, out_dims: int = 2
) -> tuple[np.ndarray, np.ndarray]:
    """Project row vectors onto their top principal components.

    Returns (projected (n, out_dims), explained variance ratios).  The
    eigenvector sign is fixed so its first nonzero component is positive,
    making repeated runs byte-identical.
    """
    data = np.asarray(embeddings, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError("embeddings must be 2-D (n, d)")
    n, d = data.shape
    if n < out_dims + 1:
        raise ValueError(f"need at least {out_dims + 1} vectors, got {n}")
    if d < out_dims:
        raise ValueError(f"need dims >= {out_dims}, got {d}")

    centered = data - data.mean(axis=0)
    cov = centered.T @ centered / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    eigvals = eigvals[::-1]
    eigvecs = eigvecs[:, ::-1]
    clipped = np.clip(eigvals, 0.0, None)
    total = float(clipped.sum())
    if total == 0.0:
        raise ValueError("degenerate embeddings: all points identical")

    components = eigvecs[:, :out_dims].copy()
    for c in range(out_dims):
        col = components[:, c]
        # "nonzero" with a tolerance: eigh leaves ~1e-17 noise in components
        # that are exactly zero in exact arithmetic, and the sign choice must
        # not key off that noise (unit-norm columns, so an absolute cut works)
        nonzero = np.flatnonzero(np.abs(col) > 1e-12)
        if nonzero.size and col[nonzero[0]] < 0.0:
            components[:, c] = -col
    projected = centered @ components
    ratios = clipped[:out_dims] / total
    return projected, ratios
