"""Matrix-vector products evaluated directly on the grammar.

Right product ``y = M @ x``: one ascending pass over the rules fills a scratch
vector ``W`` with each rule's contribution under ``x`` (a rule's contribution
is the sum of its two children's), then one pass over the final sequence
accumulates a running row sum that a delimiter flushes into ``y``.

Left product ``x^T = y^T M``: one pass over the final sequence pushes the
current row's coefficient ``y[row]`` onto rule scratch cells (or straight into
``x`` for plain pairs), then one descending pass over the rules propagates each
cell to its two children.

Both directions touch every rule exactly once and every final-sequence symbol
exactly once, which the instrumented variants report verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import jit
from .errors import DimensionError
from .grammar import Grammar


@dataclass(frozen=True)
class OpCounts:
    """Exact number of visits performed by one multiplication."""

    rule_visits: int
    final_visits: int


def _right_kernel(rules, final, values, x, m, base, w, y):
    for i in range(rules.shape[0]):
        acc = 0.0
        for k in range(2):
            code = rules[i, k]
            if code >= base:
                acc += w[code - base]
            else:
                t = code - 1
                acc += values[t // m] * x[t % m]
        w[i] = acc
    row = 0
    acc = 0.0
    for idx in range(final.shape[0]):
        code = final[idx]
        if code == 0:
            y[row] = acc
            acc = 0.0
            row += 1
        elif code >= base:
            acc += w[code - base]
        else:
            t = code - 1
            acc += values[t // m] * x[t % m]


def _left_kernel(rules, final, values, y, m, base, w, x):
    row = 0
    for idx in range(final.shape[0]):
        code = final[idx]
        if code == 0:
            row += 1
        elif code >= base:
            w[code - base] += y[row]
        else:
            t = code - 1
            x[t % m] += y[row] * values[t // m]
    for i in range(rules.shape[0] - 1, -1, -1):
        wi = w[i]
        for k in range(2):
            code = rules[i, k]
            if code >= base:
                w[code - base] += wi
            else:
                t = code - 1
                x[t % m] += values[t // m] * wi


_right_fast = jit(_right_kernel)
_left_fast = jit(_left_kernel)


def _check_vec(v: np.ndarray, length: int, name: str) -> np.ndarray:
    v = np.ascontiguousarray(v, dtype=np.float64)
    if v.shape != (length,):
        raise DimensionError(f"{name} must have shape ({length},), got {v.shape}")
    return v


def _check_buffer(v: np.ndarray | None, length: int, name: str) -> np.ndarray:
    """Validate a caller-supplied output buffer without copying it."""
    if v is None:
        return np.empty(length, dtype=np.float64)
    if v.shape != (length,):
        raise DimensionError(f"{name} must have shape ({length},), got {v.shape}")
    if v.dtype != np.float64 or not v.flags.c_contiguous or not v.flags.writeable:
        raise DimensionError(f"{name} must be a writeable contiguous float64 array")
    return v


def right_mult(
    g: Grammar,
    x: np.ndarray,
    out: np.ndarray | None = None,
    scratch: np.ndarray | None = None,
) -> np.ndarray:
    """Compute ``y = M @ x`` on the compressed form."""
    x = _check_vec(x, g.n_cols, "x")
    y = _check_buffer(out, g.n_rows, "out")
    w = _check_buffer(scratch, g.n_rules, "scratch")
    _right_fast(g.rules, g.final, g.values, x, g.n_cols, g.base, w, y)
    return y


def left_mult(
    g: Grammar,
    y: np.ndarray,
    out: np.ndarray | None = None,
    scratch: np.ndarray | None = None,
) -> np.ndarray:
    """Compute ``x^T = y^T M`` on the compressed form."""
    y = _check_vec(y, g.n_rows, "y")
    x = _check_buffer(out, g.n_cols, "out")
    x[:] = 0.0
    w = _check_buffer(scratch, g.n_rules, "scratch")
    w[:] = 0.0
    _left_fast(g.rules, g.final, g.values, y, g.n_cols, g.base, w, x)
    return x


def right_mult_counted(g: Grammar, x: np.ndarray) -> tuple[np.ndarray, OpCounts]:
    """Right product plus exact visit counts."""
    x = _check_vec(x, g.n_cols, "x")
    base, m = g.base, g.n_cols
    w = np.empty(g.n_rules, dtype=np.float64)
    y = np.empty(g.n_rows, dtype=np.float64)
    rule_visits = 0
    final_visits = 0
    for i in range(g.n_rules):
        rule_visits += 1
        acc = 0.0
        for code in g.rules[i]:
            if code >= base:
                acc += w[code - base]
            else:
                t = int(code) - 1
                acc += g.values[t // m] * x[t % m]
        w[i] = acc
    row = 0
    acc = 0.0
    for code in g.final:
        final_visits += 1
        if code == 0:
            y[row] = acc
            acc = 0.0
            row += 1
        elif code >= base:
            acc += w[code - base]
        else:
            t = int(code) - 1
            acc += g.values[t // m] * x[t % m]
    return y, OpCounts(rule_visits, final_visits)


def left_mult_counted(g: Grammar, y: np.ndarray) -> tuple[np.ndarray, OpCounts]:
    """Left product plus exact visit counts."""
    y = _check_vec(y, g.n_rows, "y")
    base, m = g.base, g.n_cols
    w = np.zeros(g.n_rules, dtype=np.float64)
    x = np.zeros(g.n_cols, dtype=np.float64)
    rule_visits = 0
    final_visits = 0
    row = 0
    for code in g.final:
        final_visits += 1
        if code == 0:
            row += 1
        elif code >= base:
            w[code - base] += y[row]
        else:
            t = int(code) - 1
            x[t % m] += y[row] * g.values[t // m]
    for i in range(g.n_rules - 1, -1, -1):
        rule_visits += 1
        wi = w[i]
        for code in g.rules[i]:
            if code >= base:
                w[code - base] += wi
            else:
                t = int(code) - 1
                x[t % m] += g.values[t // m] * wi
    return x, OpCounts(rule_visits, final_visits)


def op_counter(g: Grammar) -> OpCounts:
    """Visit counts either multiplication performs: |rules| and |final|."""
    _, right_counts = right_mult_counted(g, np.zeros(g.n_cols))
    _, left_counts = left_mult_counted(g, np.zeros(g.n_rows))
    if right_counts != left_counts:
        raise DimensionError("multiplication directions disagree on visit counts")
    return right_counts
