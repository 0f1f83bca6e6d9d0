"""Shared oracles and generators for the test suite.

Everything here is deliberately naive: straight-line reference
implementations whose correctness is obvious by inspection, used to
cross-check the optimized engine.
"""

from __future__ import annotations

import numpy as np

from gramlin.codes import DELIMITER_CODE


def repair_reference(seq, first_nonterminal):
    """Brute-force pair replacement over a plain Python list.

    Semantics mirrored by the production engine:
      * the delimiter code never participates in a pair;
      * occurrences of (u, u) in a run count greedily left-to-right
        (floor(run/2) per run);
      * the winning pair has the highest count, ties broken by the
        smallest position of the leftmost occurrence;
      * replacement stops when no pair occurs twice.
    Returns (rules, final) as plain lists.
    """
    seq = list(seq)
    rules = []
    next_code = first_nonterminal
    while True:
        counts = {}
        first_pos = {}
        # run parity applies only to (u, u) inside a run of u's: occurrences
        # anchor at the run start and repeat every other position, while a
        # pair of distinct symbols counts at every position it starts
        prev_counted = False
        prev_sym = None
        for i in range(len(seq) - 1):
            a, b = seq[i], seq[i + 1]
            if a != prev_sym:
                prev_counted = False
            counted = (
                a != DELIMITER_CODE
                and b != DELIMITER_CODE
                and not (a == b and prev_counted)
            )
            if counted:
                pair = (a, b)
                counts[pair] = counts.get(pair, 0) + 1
                if pair not in first_pos:
                    first_pos[pair] = i
            prev_counted = counted and a == b
            prev_sym = a
        best = None
        best_count = 1
        best_pos = len(seq)
        for pair, cnt in counts.items():
            if cnt < 2:
                continue
            if cnt > best_count or (cnt == best_count and first_pos[pair] < best_pos):
                best, best_count, best_pos = pair, cnt, first_pos[pair]
        if best is None:
            break
        rules.append(best)
        out = []
        i = 0
        while i < len(seq):
            if i + 1 < len(seq) and (seq[i], seq[i + 1]) == best:
                out.append(next_code)
                i += 2
            else:
                out.append(seq[i])
                i += 1
        seq = out
        next_code += 1
    return rules, seq


def expand_reference(rules, final, first_nonterminal):
    """Expand an SLP back to the flat sequence (recursive oracle)."""
    memo = {}

    def expansion(code):
        if code < first_nonterminal:
            return [code]
        if code not in memo:
            a, b = rules[code - first_nonterminal]
            memo[code] = expansion(a) + expansion(b)
        return memo[code]

    out = []
    for code in final:
        out.extend(expansion(code))
    return out


def csm_reference(mat):
    """Column-similarity oracle straight from the definition.

    score(i, j) = (#rows where both columns are nonzero
                   - #distinct value pairs among those rows) / n_rows
    """
    mat = np.asarray(mat, dtype=np.float64)
    n, m = mat.shape
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            pairs = [
                (mat[r, i], mat[r, j])
                for r in range(n)
                if mat[r, i] != 0.0 and mat[r, j] != 0.0
            ]
            out[i, j] = out[j, i] = (len(pairs) - len(set(pairs))) / n
    return out


def random_case(rng, max_rows=100, max_cols=50, max_values=16):
    """One random dense matrix with a bounded distinct-value pool."""
    n = int(rng.integers(1, max_rows + 1))
    m = int(rng.integers(1, max_cols + 1))
    k = int(rng.integers(1, max_values + 1))
    if rng.random() < 0.35:
        pool = rng.integers(-9, 10, size=k).astype(np.float64)
    else:
        pool = np.round(rng.standard_normal(k) * 8.0, 3)
    pool = np.unique(pool[pool != 0.0])
    if pool.size == 0:
        pool = np.array([1.0])
    density = rng.uniform(0.05, 1.0)
    mat = pool[rng.integers(0, pool.size, size=(n, m))]
    mat = np.where(rng.random((n, m)) < density, mat, 0.0)
    return mat


def census_like(rng, n_rows, n_cols, n_values, group=4, flip_prob=0.02, zero_prob=0.08):
    """Tall categorical-style matrix with correlated column groups.

    Columns come in consecutive groups of ``group`` near-duplicates (one
    category value drawn per row and group, lightly perturbed), so adjacent
    columns repeat (value, column) pair patterns across many rows.
    """
    n_groups = -(-n_cols // group)
    pool = np.arange(1, n_values + 1, dtype=np.float64)
    base = pool[rng.integers(0, n_values, size=(n_rows, n_groups))]
    mat = np.repeat(base, group, axis=1)[:, :n_cols]
    flips = rng.random((n_rows, n_cols)) < flip_prob
    mat[flips] = pool[rng.integers(0, n_values, size=int(flips.sum()))]
    mat[rng.random((n_rows, n_cols)) < zero_prob] = 0.0
    return mat


def correlated_shuffled(rng, n_rows=3000, n_cols=32, n_values=7):
    """Column-shuffled grouped matrix: a good reordering can place the
    near-duplicate columns adjacently again."""
    mat = census_like(rng, n_rows, n_cols, n_values, flip_prob=0.05)
    return mat[:, rng.permutation(n_cols)]


def relative_error(actual, expected):
    actual = np.asarray(actual, dtype=np.float64)
    expected = np.asarray(expected, dtype=np.float64)
    scale = max(1.0, float(np.max(np.abs(expected), initial=0.0)))
    return float(np.max(np.abs(actual - expected), initial=0.0)) / scale
