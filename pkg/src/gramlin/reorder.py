"""Column reordering driven by similarity scores.

A reordering never renames columns: :func:`apply_permutation` only re-sorts
the pair symbols inside each row so similar columns sit next to each other in
the sequence.  Stored column indices, decoding, and multiplication therefore
stay untouched; only pair-replacement quality changes.

Four ordering heuristics are provided, all deterministic:

* ``pathcover``      -- greedy heaviest-edge-first vertex-disjoint paths.
* ``pathcover+``     -- the same, but grown paths act as macro nodes whose
  edges to outside columns are reweighted to the minimum weight into the path.
* ``mwm``            -- maximum-weight matching on the ``i < j`` bipartite copy
  (each column matched to at most one successor), chained into sequences.
* ``tsp``            -- nearest-neighbour tour plus 2-opt, maximizing adjacent
  similarity along one path.

``choose_best_reordering`` compresses every candidate order (always including
the identity) per row block and keeps whichever serializes smallest, so a
reordering is only ever adopted when it actually pays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from ._accel import jit
from .blocking import BlockedMatrix, _run_per_block, resolve_workers, split_csrv
from .csrv import CsrvMatrix, build_csrv
from .errors import DimensionError
from .grammar import compress
from .repair import DEFAULT_BUCKET_LIMIT
from .similarity import SimilarityMatrix, build_csm

ALGORITHMS = ("pathcover", "pathcover+", "mwm", "tsp")


@dataclass(frozen=True)
class ColumnPermutation:
    """A visit order over columns: ``order[position] = column index``."""

    order: np.ndarray

    def __post_init__(self) -> None:
        order = np.ascontiguousarray(self.order, dtype=np.int64)
        object.__setattr__(self, "order", order)
        self.order.flags.writeable = False
        if not np.array_equal(np.sort(order), np.arange(len(order))):
            raise DimensionError("column order is not a permutation")

    @property
    def n_cols(self) -> int:
        return len(self.order)

    def positions(self) -> np.ndarray:
        """Inverse map: ``positions()[column] = position in the order``."""
        pos = np.empty(len(self.order), dtype=np.int64)
        pos[self.order] = np.arange(len(self.order))
        return pos

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.order, np.arange(len(self.order))))


def identity_permutation(n_cols: int) -> ColumnPermutation:
    return ColumnPermutation(np.arange(n_cols, dtype=np.int64))


def _sorted_edges(s: SimilarityMatrix):
    order = np.lexsort((s.col_j, s.col_i, -s.scores))
    return s.col_i[order], s.col_j[order], s.scores[order]


class _PathSet:
    """Vertex-disjoint paths under construction (used by both path covers)."""

    def __init__(self, n: int) -> None:
        self.parent = list(range(n))
        self.degree = [0] * n
        self.adj: list[list[int]] = [[] for _ in range(n)]
        self.comp_weight = [0.0] * n  # heaviest accepted edge per component

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def can_link(self, i: int, j: int) -> bool:
        return (
            self.degree[i] < 2 and self.degree[j] < 2 and self.find(i) != self.find(j)
        )

    def link(self, i: int, j: int, weight: float) -> None:
        ra, rb = self.find(i), self.find(j)
        w = max(self.comp_weight[ra], self.comp_weight[rb], weight)
        self.parent[rb] = ra
        self.comp_weight[ra] = w
        self.degree[i] += 1
        self.degree[j] += 1
        self.adj[i].append(j)
        self.adj[j].append(i)

    def extract_order(self, n: int) -> np.ndarray:
        comps: dict[int, list[int]] = {}
        for v in range(n):
            comps.setdefault(self.find(v), []).append(v)
        paths = []
        singles = []
        for nodes in comps.values():
            if len(nodes) == 1:
                singles.append(nodes[0])
                continue
            ends = [v for v in nodes if self.degree[v] == 1]
            start = min(ends)
            walk = [start]
            prev = -1
            cur = start
            while True:
                nxts = [u for u in self.adj[cur] if u != prev]
                if not nxts:
                    break
                prev, cur = cur, nxts[0]
                walk.append(cur)
            paths.append((-self.comp_weight[self.find(start)], min(nodes), walk))
        paths.sort(key=lambda t: (t[0], t[1]))
        out = [v for _, _, walk in paths for v in walk]
        out.extend(sorted(singles))
        return np.array(out, dtype=np.int64)


def reorder_pathcover(s: SimilarityMatrix) -> ColumnPermutation:
    """Greedy disjoint paths: heaviest edges first, no vertex used twice."""
    ps = _PathSet(s.n_cols)
    for i, j, w in zip(*_sorted_edges(s)):
        if ps.can_link(int(i), int(j)):
            ps.link(int(i), int(j), float(w))
    return ColumnPermutation(ps.extract_order(s.n_cols))


def reorder_pathcover_plus(s: SimilarityMatrix) -> ColumnPermutation:
    """Path cover with macro-node reweighting.

    Grown paths behave as single nodes; the weight between two components is
    the minimum of the retained weights between their members, and each merge
    attaches at the endpoint pair whose original score is highest.
    """
    n = s.n_cols
    orig = {(int(i), int(j)): float(w) for i, j, w in zip(s.col_i, s.col_j, s.scores)}

    def orig_score(a: int, b: int) -> float:
        return orig.get((a, b) if a < b else (b, a), 0.0)

    comp_of = list(range(n))  # column -> component id (smallest member)
    members: dict[int, list[int]] = {v: [v] for v in range(n)}  # id -> path order
    weights: dict[tuple[int, int], float] = {}
    for (i, j), w in orig.items():
        weights[(i, j)] = w
    best_accept: dict[int, float] = {v: 0.0 for v in range(n)}

    while weights:
        (ca, cb), w = min(
            weights.items(), key=lambda kv: (-kv[1], kv[0][0], kv[0][1])
        )
        path_a, path_b = members[ca], members[cb]
        ends_a = [path_a[0], path_a[-1]] if len(path_a) > 1 else [path_a[0]]
        ends_b = [path_b[0], path_b[-1]] if len(path_b) > 1 else [path_b[0]]
        ea, eb = max(
            ((a, b) for a in ends_a for b in ends_b),
            key=lambda ab: (orig_score(*ab), -ab[0], -ab[1]),
        )
        if path_a[-1] != ea:
            path_a = path_a[::-1]
        if path_b[0] != eb:
            path_b = path_b[::-1]
        new_id = min(ca, cb)
        merged = path_a + path_b
        members.pop(ca)
        members.pop(cb)
        members[new_id] = merged
        for v in merged:
            comp_of[v] = new_id
        best_accept[new_id] = max(best_accept[ca], best_accept[cb], w)

        # Fold weights of both halves: min toward every other component.
        folded: dict[int, float] = {}
        for (x, y), wv in list(weights.items()):
            if x in (ca, cb) or y in (ca, cb):
                other = y if x in (ca, cb) else x
                del weights[(x, y)]
                if other in (ca, cb):
                    continue
                folded[other] = min(folded.get(other, np.inf), wv)
        for other, wv in folded.items():
            key = (new_id, other) if new_id < other else (other, new_id)
            weights[key] = min(weights.get(key, np.inf), wv)

    paths = sorted(
        members.values(),
        key=lambda path: (-best_accept[comp_of[path[0]]], min(path)),
    )
    multi = [v for path in paths if len(path) > 1 for v in path]
    singles = sorted(v for path in paths if len(path) == 1 for v in path)
    return ColumnPermutation(np.array(multi + singles, dtype=np.int64))


def reorder_mwm(s: SimilarityMatrix) -> ColumnPermutation:
    """Maximum-weight matching of columns to later columns, chained."""
    n = s.n_cols
    weight = np.zeros((n, n), dtype=np.float64)
    weight[s.col_i, s.col_j] = s.scores  # only i < j entries are candidates
    rows, cols = linear_sum_assignment(weight, maximize=True)
    succ = np.full(n, -1, dtype=np.int64)
    has_pred = np.zeros(n, dtype=bool)
    for i, j in zip(rows, cols):
        if weight[i, j] > 0.0:
            succ[i] = j
            has_pred[j] = True
    order = []
    singles = []
    for v in range(n):
        if has_pred[v]:
            continue
        if succ[v] == -1:
            singles.append(v)
            continue
        cur = v
        while cur != -1:
            order.append(cur)
            cur = int(succ[cur])
    order.extend(singles)
    return ColumnPermutation(np.array(order, dtype=np.int64))


@jit
def _two_opt_kernel(weight, order, max_sweeps):
    n = order.shape[0]
    sweeps = 0
    improved = True
    while improved and sweeps < max_sweeps:
        improved = False
        sweeps += 1
        for i in range(n - 1):
            for j in range(i + 1, n):
                before = 0.0
                after = 0.0
                if i > 0:
                    before += weight[order[i - 1], order[i]]
                    after += weight[order[i - 1], order[j]]
                if j < n - 1:
                    before += weight[order[j], order[j + 1]]
                    after += weight[order[i], order[j + 1]]
                if after > before + 1e-12:
                    lo, hi = i, j
                    while lo < hi:
                        tmp = order[lo]
                        order[lo] = order[hi]
                        order[hi] = tmp
                        lo += 1
                        hi -= 1
                    improved = True
    return sweeps


def reorder_tsp(s: SimilarityMatrix, max_sweeps: int = 40) -> ColumnPermutation:
    """Nearest-neighbour path from column 0, improved by 2-opt."""
    n = s.n_cols
    if n == 0:
        return ColumnPermutation(np.zeros(0, dtype=np.int64))
    weight = np.zeros((n, n), dtype=np.float64)
    weight[s.col_i, s.col_j] = s.scores
    weight += weight.T
    visited = np.zeros(n, dtype=bool)
    order = np.empty(n, dtype=np.int64)
    order[0] = 0
    visited[0] = True
    for t in range(1, n):
        w = np.where(visited, -1.0, weight[order[t - 1]])
        best = int(np.argmax(w))  # ties resolve to the smallest index
        order[t] = best
        visited[best] = True
    _two_opt_kernel(weight, order, max_sweeps)
    return ColumnPermutation(order)


_REORDER_FNS = {
    "pathcover": reorder_pathcover,
    "pathcover+": reorder_pathcover_plus,
    "mwm": reorder_mwm,
    "tsp": reorder_tsp,
}


def reorder_by(name: str, s: SimilarityMatrix) -> ColumnPermutation:
    """Dispatch one of the named ordering heuristics."""
    if name not in _REORDER_FNS:
        raise DimensionError(
            f"unknown reordering algorithm {name!r}; expected {ALGORITHMS}"
        )
    return _REORDER_FNS[name](s)


def apply_permutation(c: CsrvMatrix, p: ColumnPermutation) -> CsrvMatrix:
    """Re-sort each row's pairs into the permutation's column visit order.

    Stored column indices are left alone; only the within-row symbol order
    changes, so decoding is unaffected.
    """
    if p.n_cols != c.n_cols:
        raise DimensionError(
            f"permutation covers {p.n_cols} columns, matrix has {c.n_cols}"
        )
    pos = p.positions()
    pair_mask = c.codes != 0
    rows = np.cumsum(~pair_mask)  # delimiters count themselves; undo below
    rows = np.where(pair_mask, rows, rows - 1)
    sort_pos = np.where(
        pair_mask, pos[np.where(pair_mask, (c.codes - 1) % c.n_cols, 0)], c.n_cols
    )
    perm = np.lexsort((sort_pos, rows))
    return CsrvMatrix(
        n_rows=c.n_rows, n_cols=c.n_cols, values=c.values, codes=c.codes[perm]
    )


@dataclass(frozen=True)
class ReorderDecision:
    """Outcome of candidate selection for one row block."""

    block: int
    chosen: str
    candidate_bytes: tuple[tuple[str, int], ...]
    order: np.ndarray

    @property
    def bytes(self) -> int:
        return dict(self.candidate_bytes)[self.chosen]


def choose_best_reordering(
    matrix: np.ndarray | CsrvMatrix,
    n_blocks: int = 1,
    variant: str = "re_ans",
    algorithms: tuple[str, ...] = ALGORITHMS,
    prune: str = "local",
    k: int = 16,
    workers: int | None = None,
    bucket_limit: int = DEFAULT_BUCKET_LIMIT,
) -> tuple[BlockedMatrix, list[ReorderDecision]]:
    """Per block, compress every candidate column order and keep the smallest.

    The identity order is always a candidate, so the result never serializes
    larger than not reordering at all.
    """
    from .csrv import decode_csrv
    from .serialization import payload_bytes

    for name in algorithms:
        if name not in _REORDER_FNS:
            raise DimensionError(f"unknown reordering algorithm {name!r}")
    c = matrix if isinstance(matrix, CsrvMatrix) else build_csrv(matrix)
    parts = split_csrv(c, n_blocks)
    workers = resolve_workers(workers)

    def decide(index: int, part: CsrvMatrix):
        def run():
            block_dense = decode_csrv(part)
            csm = build_csm(block_dense, mode=prune, k=k)
            candidates: list[tuple[str, ColumnPermutation]] = [
                ("identity", identity_permutation(part.n_cols))
            ]
            candidates += [(name, reorder_by(name, csm)) for name in algorithms]
            best = None
            sizes = []
            for name, perm in candidates:
                g = compress(apply_permutation(part, perm), bucket_limit)
                nbytes = payload_bytes(g, variant)
                sizes.append((name, nbytes))
                if best is None or nbytes < best[1]:
                    best = (name, nbytes, g, perm)
            assert best is not None
            return best[2], ReorderDecision(
                block=index,
                chosen=best[0],
                candidate_bytes=tuple(sizes),
                order=best[3].order,
            )

        return run

    results = _run_per_block(
        [decide(i, part) for i, part in enumerate(parts)], workers
    )
    grammars = tuple(g for g, _ in results)
    decisions = [d for _, d in results]
    bm = BlockedMatrix(
        n_rows=c.n_rows, n_cols=c.n_cols, values=c.values, blocks=grammars
    )
    return bm, decisions
