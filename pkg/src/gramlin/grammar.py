"""Grammar form of a matrix: binary rules plus a final symbol sequence.

``compress`` runs pair replacement over the delimited pair sequence of a
:class:`~gramlin.csrv.CsrvMatrix`; ``expand`` undoes it exactly.  Rule bodies
never contain row delimiters, and rule ``i`` may reference only rules with
smaller ids, so one ascending pass can evaluate all rules.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import jit
from .codes import DELIMITER_CODE, nonterminal_base
from .csrv import CsrvMatrix
from .errors import DimensionError
from .repair import DEFAULT_BUCKET_LIMIT, repair_sequence


@dataclass(frozen=True)
class Grammar:
    """Compressed matrix: value dictionary, binary rules, final sequence."""

    n_rows: int
    n_cols: int
    values: np.ndarray  # float64 dictionary shared with the source matrix
    rules: np.ndarray  # int64 (n_rules, 2); rule i defines code base + i
    final: np.ndarray  # int64, delimiters preserved

    def __post_init__(self) -> None:
        self.values.flags.writeable = False
        self.rules.flags.writeable = False
        self.final.flags.writeable = False

    @property
    def base(self) -> int:
        """Code of the first nonterminal."""
        return nonterminal_base(len(self.values), self.n_cols)

    @property
    def n_rules(self) -> int:
        return len(self.rules)

    @property
    def size(self) -> int:
        """Symbol count |final| + 2 * |rules| of the grammar."""
        return len(self.final) + 2 * len(self.rules)


@dataclass(frozen=True)
class GrammarStats:
    """Size accounting for one grammar."""

    n_rows: int
    n_cols: int
    n_values: int
    nnz: int
    sequence_symbols: int  # |S| of the uncompressed pair sequence
    n_rules: int
    final_symbols: int
    size: int  # final_symbols + 2 * n_rules

    def as_dict(self) -> dict[str, int]:
        return dict(vars(self))


def compress(c: CsrvMatrix, bucket_limit: int = DEFAULT_BUCKET_LIMIT) -> Grammar:
    """Grammar-compress the pair sequence of a matrix."""
    rules, final = repair_sequence(c.codes, c.nonterminal_base, bucket_limit)
    return Grammar(
        n_rows=c.n_rows,
        n_cols=c.n_cols,
        values=c.values,
        rules=rules,
        final=final,
    )


@jit
def _rule_lengths_kernel(rules, base):
    lengths = np.empty(rules.shape[0], np.int64)
    for i in range(rules.shape[0]):
        total = 0
        for k in range(2):
            code = rules[i, k]
            total += lengths[code - base] if code >= base else 1
        lengths[i] = total
    return lengths


@jit
def _expanded_length_kernel(final, base, lengths):
    total = 0
    for k in range(final.shape[0]):
        code = final[k]
        total += lengths[code - base] if code >= base else 1
    return total


def rule_lengths(g: Grammar) -> np.ndarray:
    """Expanded length of every rule, in one ascending pass."""
    return _rule_lengths_kernel(g.rules, g.base)


@jit
def _expand_kernel(rules, final, base, lengths, out):
    nr = rules.shape[0]
    # Depth of a rule chain is at most the rule count; +1 slack for the seed.
    stack = np.empty(nr + 2, np.int64)
    idx = 0
    for k in range(final.shape[0]):
        stack[0] = final[k]
        sp = 1
        while sp > 0:
            sp -= 1
            code = stack[sp]
            if code < base:
                out[idx] = code
                idx += 1
            else:
                r = code - base
                stack[sp] = rules[r, 1]
                stack[sp + 1] = rules[r, 0]
                sp += 2
    return idx


def expand(g: Grammar) -> CsrvMatrix:
    """Reconstruct the pair sequence the grammar was built from."""
    base = g.base
    lengths = rule_lengths(g)
    total = int(_expanded_length_kernel(g.final, base, lengths))
    out = np.empty(total, dtype=np.int64)
    written = _expand_kernel(g.rules, g.final, base, lengths, out)
    if written != total:
        raise DimensionError("rule lengths disagree with expansion")
    return CsrvMatrix(n_rows=g.n_rows, n_cols=g.n_cols, values=g.values, codes=out)


def grammar_stats(g: Grammar) -> GrammarStats:
    """Count symbols on both sides of the compression."""
    seq_len = int(_expanded_length_kernel(g.final, g.base, rule_lengths(g)))
    delims = int(np.count_nonzero(g.final == DELIMITER_CODE))
    return GrammarStats(
        n_rows=g.n_rows,
        n_cols=g.n_cols,
        n_values=len(g.values),
        nnz=seq_len - delims,
        sequence_symbols=seq_len,
        n_rules=g.n_rules,
        final_symbols=len(g.final),
        size=g.size,
    )


def validate_grammar(g: Grammar) -> None:
    """Check structural invariants; raise on violation."""
    base = g.base
    for i in range(g.n_rules):
        for code in g.rules[i]:
            if code == DELIMITER_CODE:
                raise DimensionError(f"rule {i} contains a row delimiter")
            if code < 0 or code >= base + i:
                raise DimensionError(f"rule {i} references code {code} out of range")
    top = base + g.n_rules
    if len(g.final) and (g.final.min() < 0 or g.final.max() >= top):
        raise DimensionError("final sequence contains out-of-range codes")
    delims = int(np.count_nonzero(g.final == DELIMITER_CODE))
    if delims != g.n_rows:
        raise DimensionError(f"expected {g.n_rows} delimiters in final, found {delims}")


def canonical_form(g: Grammar) -> tuple[tuple[tuple[int, int], ...], tuple[int, ...]]:
    """Rule bodies and final sequence with rule ids relabeled in first-use order.

    Two grammars over the same terminals are equal up to rule renumbering
    exactly when their canonical forms are equal.
    """
    base = g.base
    relabel: dict[int, int] = {}
    order: list[int] = []

    def visit(code: int) -> None:
        stack = [code]
        while stack:
            c = stack.pop()
            if c < base or (c - base) in relabel:
                continue
            r = c - base
            relabel[r] = len(order)
            order.append(r)
            stack.append(int(g.rules[r, 1]))
            stack.append(int(g.rules[r, 0]))

    for code in g.final:
        visit(int(code))
    for r in range(g.n_rules):  # unreachable rules, if any, keep a stable spot
        visit(base + r)

    def rename(code: int) -> int:
        return code if code < base else base + relabel[code - base]

    rules = tuple(
        (rename(int(g.rules[r, 0])), rename(int(g.rules[r, 1]))) for r in order
    )
    final = tuple(rename(int(c)) for c in g.final)
    return rules, final
