"""Column-pair similarity scores for reordering decisions.

The score of columns ``i < j`` counts repeated fully-nonzero value pairs down
the two columns, normalized by the row count: over the rows where both columns
are nonzero, every distinct (value_i, value_j) combination contributes its
occurrence count minus one.  Identical column pairs in many rows therefore
score high, which predicts that placing the columns adjacently helps pair
replacement.

Pruning keeps the edge list small: ``local`` keeps an edge only when each
endpoint ranks the other among its own top ``k`` scores (so no column retains
more than ``k`` scores), and ``global`` keeps the ``k`` highest-scoring edges
overall.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .csrv import _as_dense
from .errors import DimensionError

MODES = ("full", "local", "global")


@dataclass(frozen=True)
class SimilarityMatrix:
    """Sparse upper-triangular column-similarity scores."""

    n_cols: int
    n_rows: int
    mode: str
    k: int  # retained scores per column (local) or overall (global); 0 = all
    col_i: np.ndarray  # int64, col_i < col_j
    col_j: np.ndarray
    scores: np.ndarray  # float64, > 0

    def __post_init__(self) -> None:
        self.col_i.flags.writeable = False
        self.col_j.flags.writeable = False
        self.scores.flags.writeable = False

    @property
    def n_edges(self) -> int:
        return len(self.scores)

    def as_dense(self) -> np.ndarray:
        """Symmetric score matrix (zeros where no edge is retained)."""
        dense = np.zeros((self.n_cols, self.n_cols), dtype=np.float64)
        dense[self.col_i, self.col_j] = self.scores
        dense[self.col_j, self.col_i] = self.scores
        return dense

    def score_of(self, i: int, j: int) -> float:
        """Retained score between two columns (0.0 if pruned or dissimilar)."""
        if i == j:
            raise DimensionError("similarity is defined between distinct columns")
        lo, hi = (i, j) if i < j else (j, i)
        match = (self.col_i == lo) & (self.col_j == hi)
        idx = np.flatnonzero(match)
        return float(self.scores[idx[0]]) if len(idx) else 0.0


def _pair_scores(dense: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n, m = dense.shape
    uniq, inverse = np.unique(dense, return_inverse=True)
    codes = inverse.reshape(n, m).astype(np.int64)
    zero_idx = np.searchsorted(uniq, 0.0)
    zero_code = zero_idx if zero_idx < len(uniq) and uniq[zero_idx] == 0.0 else -1
    nonzero = codes != zero_code
    span = np.int64(len(uniq) + 1)
    ii, jj, ss = [], [], []
    for i in range(m - 1):
        col_i = codes[:, i]
        nz_i = nonzero[:, i]
        for j in range(i + 1, m):
            both = nz_i & nonzero[:, j]
            count = int(both.sum())
            if count == 0:
                continue
            keys = col_i[both] * span + codes[both, j]
            reps = count - len(np.unique(keys))
            if reps > 0:
                ii.append(i)
                jj.append(j)
                ss.append(reps / n)
    return (
        np.array(ii, dtype=np.int64),
        np.array(jj, dtype=np.int64),
        np.array(ss, dtype=np.float64),
    )


def _prune_local(ii, jj, ss, n_cols, k):
    """Keep an edge only when both endpoints rank it in their own top k."""
    # Rank edges per endpoint by (score desc, partner asc): iterate the global
    # order and count how many edges each column has already ranked.
    order = np.lexsort((jj, ii, -ss))  # score desc, then (i, j) asc
    rank_i = np.empty(len(ss), dtype=np.int64)
    rank_j = np.empty(len(ss), dtype=np.int64)
    per_col_seen = np.zeros(n_cols, dtype=np.int64)
    for e in order:
        rank_i[e] = per_col_seen[ii[e]]
        rank_j[e] = per_col_seen[jj[e]]
        per_col_seen[ii[e]] += 1
        per_col_seen[jj[e]] += 1
    return (rank_i < k) & (rank_j < k)


def build_csm(
    matrix: np.ndarray, mode: str = "full", k: int = 0
) -> SimilarityMatrix:
    """Score all column pairs of a dense matrix, optionally pruned."""
    if mode not in MODES:
        raise DimensionError(f"unknown pruning mode {mode!r}; expected {MODES}")
    if mode != "full" and k < 1:
        raise DimensionError("pruned modes need k >= 1")
    dense = _as_dense(matrix)
    n, m = dense.shape
    if n == 0:
        ii = jj = np.zeros(0, dtype=np.int64)
        ss = np.zeros(0, dtype=np.float64)
    else:
        ii, jj, ss = _pair_scores(dense)
    if mode == "local" and len(ss):
        keep = _prune_local(ii, jj, ss, m, k)
        ii, jj, ss = ii[keep], jj[keep], ss[keep]
    elif mode == "global" and len(ss):
        order = np.lexsort((jj, ii, -ss))[:k]
        keep = np.zeros(len(ss), dtype=bool)
        keep[order] = True
        ii, jj, ss = ii[keep], jj[keep], ss[keep]
    return SimilarityMatrix(
        n_cols=m, n_rows=n, mode=mode, k=k, col_i=ii, col_j=jj, scores=ss
    )
