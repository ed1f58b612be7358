"""Exact per-frame k-nearest-neighbor regression under cosine similarity.

Two routes compute the same answer: `knn_match` pre-normalizes reference
rows once and runs blocked matrix products; `knn_match_naive` scores one
frame at a time with no shared machinery.  Tests hold them to identical
neighbor indices, so neither may be "fixed" to agree with the other.

Similarity of any pairing involving a zero-norm vector is defined as 0
(keeps the pipeline total); occurrences are logged.  Ties break toward
the lowest reference row index.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

DEFAULT_FRAME_BLOCK = 256
DEFAULT_ROW_BLOCK = 16384


@dataclass
class MatchResult:
    matched: np.ndarray  # (T, d) float64, mean of the k neighbors per frame
    neighbor_indices: np.ndarray  # (T, k) int64 into the reference matrix
    neighbor_similarities: np.ndarray  # (T, k) float64, non-increasing per row


def unit_rows(matrix: np.ndarray) -> np.ndarray:
    """Rows scaled to unit Euclidean norm (float64); zero rows stay zero."""
    mat = np.asarray(matrix, dtype=np.float64)
    norms = np.linalg.norm(mat, axis=1)
    n_zero = int((norms == 0.0).sum())
    if n_zero:
        log.warning("normalizing matrix with %d zero-norm rows; their similarity is 0", n_zero)
    safe = np.where(norms == 0.0, 1.0, norms)
    return mat / safe[:, None]


def _topk_desc(values: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest values, ordered by (value desc, index asc).

    Exact under ties: when the k-th largest value is shared, the lowest
    row indices among the tied values are taken.
    """
    n = values.shape[0]
    if k == n:
        chosen = np.arange(n)
    else:
        kth = np.partition(values, n - k)[n - k]
        above = np.flatnonzero(values > kth)
        need = k - above.size
        tied = np.flatnonzero(values == kth)[:need]
        chosen = np.concatenate([above, tied])
    order = np.lexsort((chosen, -values[chosen]))
    return chosen[order]


def cosine_topk(query: np.ndarray, reference: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """k rows of `reference` maximizing cosine similarity with `query`.

    Returns (indices, similarities) sorted by similarity, non-increasing,
    ties to the lowest index.  Exact; no approximation.
    """
    q = np.asarray(query, dtype=np.float64).reshape(-1)
    ref = np.asarray(reference)
    if ref.ndim != 2 or ref.shape[1] != q.shape[0]:
        raise ValueError(f"reference shape {ref.shape} incompatible with query dim {q.shape[0]}")
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > ref.shape[0]:
        raise ValueError(f"k={k} exceeds reference rows {ref.shape[0]}")
    qnorm = np.linalg.norm(q)
    if qnorm == 0.0:
        log.warning("zero-norm query vector; all similarities are 0")
        sims = np.zeros(ref.shape[0])
    else:
        sims = unit_rows(ref) @ (q / qnorm)
    idx = _topk_desc(sims, k)
    return idx.astype(np.int64), sims[idx]


def _block_topk(sims: np.ndarray, k: int, base: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-row exact top-k of a (B, R_block) similarity block."""
    rows = sims.shape[0]
    idx = np.empty((rows, k), dtype=np.int64)
    val = np.empty((rows, k), dtype=np.float64)
    for i in range(rows):
        chosen = _topk_desc(sims[i], k)
        idx[i] = chosen + base
        val[i] = sims[i, chosen]
    return idx, val


def knn_match(
    query: np.ndarray,
    reference: np.ndarray,
    k: int,
    *,
    reference_unit: np.ndarray | None = None,
    frame_block: int = DEFAULT_FRAME_BLOCK,
    row_block: int = DEFAULT_ROW_BLOCK,
) -> MatchResult:
    """Match every query frame to the mean of its k nearest reference rows.

    `reference_unit` may carry pre-normalized rows (e.g. cached on a
    SpeakerPool); normalization is algebraic so the result is identical
    with or without it.
    """
    q = np.asarray(query)
    ref = np.asarray(reference)
    if q.ndim != 2 or ref.ndim != 2:
        raise ValueError("query and reference must be 2-D")
    if q.shape[1] != ref.shape[1]:
        raise ValueError(f"dims mismatch: query {q.shape[1]}, reference {ref.shape[1]}")
    n_rows = ref.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n_rows:
        raise ValueError(f"k={k} exceeds reference rows {n_rows}")

    if reference_unit is None:
        reference_unit = unit_rows(ref)
    qunit = unit_rows(q)

    frames = q.shape[0]
    dims = q.shape[1]
    out_idx = np.empty((frames, k), dtype=np.int64)
    out_sim = np.empty((frames, k), dtype=np.float64)
    matched = np.empty((frames, dims), dtype=np.float64)

    for start in range(0, frames, frame_block):
        stop = min(start + frame_block, frames)
        qblock = qunit[start:stop]
        if n_rows <= row_block:
            sims = qblock @ reference_unit.T
            idx, val = _block_topk(sims, k, base=0)
        else:
            idx = val = None
            for rstart in range(0, n_rows, row_block):
                rstop = min(rstart + row_block, n_rows)
                sims = qblock @ reference_unit[rstart:rstop].T
                kk = min(k, rstop - rstart)
                bidx, bval = _block_topk(sims, kk, base=rstart)
                if idx is None:
                    idx, val = bidx, bval
                else:
                    cat_idx = np.concatenate([idx, bidx], axis=1)
                    cat_val = np.concatenate([val, bval], axis=1)
                    idx = np.empty((cat_idx.shape[0], k), dtype=np.int64)
                    val = np.empty((cat_idx.shape[0], k), dtype=np.float64)
                    for i in range(cat_idx.shape[0]):
                        # candidate indices are globally distinct, so the
                        # lowest-index tie rule carries over the merge
                        order = np.lexsort((cat_idx[i], -cat_val[i]))[:k]
                        idx[i] = cat_idx[i, order]
                        val[i] = cat_val[i, order]
        out_idx[start:stop] = idx
        out_sim[start:stop] = val
        matched[start:stop] = ref[idx].astype(np.float64).mean(axis=1)

    return MatchResult(matched=matched, neighbor_indices=out_idx, neighbor_similarities=out_sim)


def knn_match_naive(query: np.ndarray, reference: np.ndarray, k: int) -> MatchResult:
    """Brute-force oracle: score one frame at a time against every row.

    No pre-normalization, no blocking, selection via full stable sort.
    Kept deliberately independent of `knn_match`.
    """
    q = np.asarray(query, dtype=np.float64)
    ref = np.asarray(reference, dtype=np.float64)
    if q.ndim != 2 or ref.ndim != 2 or q.shape[1] != ref.shape[1]:
        raise ValueError("query and reference must be 2-D with equal dims")
    if k < 1 or k > ref.shape[0]:
        raise ValueError("k out of range")

    rnorms = np.linalg.norm(ref, axis=1)
    out_idx = np.empty((q.shape[0], k), dtype=np.int64)
    out_sim = np.empty((q.shape[0], k), dtype=np.float64)
    matched = np.empty((q.shape[0], q.shape[1]), dtype=np.float64)
    for i in range(q.shape[0]):
        qi = q[i]
        qn = np.linalg.norm(qi)
        dots = ref @ qi
        denom = rnorms * qn
        sims = np.divide(dots, denom, out=np.zeros_like(dots), where=denom != 0.0)
        order = np.argsort(-sims, kind="stable")[:k]
        out_idx[i] = order
        out_sim[i] = sims[order]
        matched[i] = ref[order].mean(axis=0)
    return MatchResult(matched=matched, neighbor_indices=out_idx, neighbor_similarities=out_sim)
