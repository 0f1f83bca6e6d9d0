"""Dictionary-plus-sequence form of a dense matrix.

A matrix is stored as a dictionary ``values`` of its distinct non-zero entries
(in first-occurrence, row-major order) and one flat int64 sequence ``codes``
holding a (value, column) pair code for every non-zero entry plus a delimiter
code ``0`` closing each row (see :mod:`gramlin.codes`).  The sequence has
exactly ``nnz + n_rows`` symbols and, because column indices are strictly
increasing inside a row, never repeats a symbol in adjacent positions within a
row.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ._accel import jit
from .codes import DELIMITER_CODE, ROW_DELIMITER, Pair, RowDelimiter, nonterminal_base
from .errors import DimensionError, IngestError


@dataclass(frozen=True)
class CsrvMatrix:
    """A matrix as value dictionary + delimited (value, column) pair sequence."""

    n_rows: int
    n_cols: int
    values: np.ndarray  # float64, distinct non-zeros, first-occurrence order
    codes: np.ndarray  # int64, one pair code per non-zero plus one 0 per row

    def __post_init__(self) -> None:
        self.values.flags.writeable = False
        self.codes.flags.writeable = False

    @property
    def nnz(self) -> int:
        """Number of non-zero entries."""
        return len(self.codes) - self.n_rows

    @property
    def nonterminal_base(self) -> int:
        """First integer code not used by this matrix's terminals."""
        return nonterminal_base(len(self.values), self.n_cols)

    def symbols(self) -> Iterator[Pair | RowDelimiter]:
        """Yield the sequence as symbol objects."""
        m = self.n_cols
        for code in self.codes:
            if code == DELIMITER_CODE:
                yield ROW_DELIMITER
            else:
                t = int(code) - 1
                yield Pair(t // m, t % m)


def _as_dense(matrix: np.ndarray) -> np.ndarray:
    dense = np.ascontiguousarray(matrix, dtype=np.float64)
    if dense.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got ndim={dense.ndim}")
    if np.isnan(dense).any():
        raise IngestError("matrix contains NaN entries")
    return dense


def build_csrv(matrix: np.ndarray) -> CsrvMatrix:
    """Build the dictionary + sequence form of a dense matrix."""
    dense = _as_dense(matrix)
    n, m = dense.shape
    flat = dense.ravel()
    nz = np.flatnonzero(flat)
    # Distinct values in first-occurrence order.
    sorted_vals, first_pos, inverse = np.unique(
        flat[nz], return_index=True, return_inverse=True
    )
    order = np.argsort(first_pos, kind="stable")
    values = sorted_vals[order]
    rank = np.empty(len(order), dtype=np.int64)
    rank[order] = np.arange(len(order), dtype=np.int64)
    value_idx = rank[inverse]

    cols = nz % m
    pair_codes = 1 + value_idx * m + cols

    counts = np.count_nonzero(dense, axis=1)
    total = int(counts.sum()) + n
    codes = np.zeros(total, dtype=np.int64)
    ends = np.cumsum(counts + 1) - 1
    mask = np.ones(total, dtype=bool)
    mask[ends] = False
    codes[mask] = pair_codes
    return CsrvMatrix(n_rows=n, n_cols=m, values=values, codes=codes)


def decode_csrv(c: CsrvMatrix) -> np.ndarray:
    """Reconstruct the dense matrix exactly."""
    m = c.n_cols
    pair_mask = c.codes != DELIMITER_CODE
    pairs = c.codes[pair_mask] - 1
    rows = np.cumsum(~pair_mask) if len(c.codes) else np.zeros(0, dtype=np.int64)
    rows = rows[pair_mask]
    dense = np.zeros((c.n_rows, m), dtype=np.float64)
    if len(pairs):
        dense[rows, pairs % m] = c.values[pairs // m]
    return dense


def validate_csrv(c: CsrvMatrix) -> None:
    """Check structural invariants; raise on violation."""
    if len(c.values) != len(np.unique(c.values)):
        raise IngestError("value dictionary has duplicate entries")
    if np.any(c.values == 0.0):
        raise IngestError("value dictionary contains zero")
    delims = np.count_nonzero(c.codes == DELIMITER_CODE)
    if delims != c.n_rows:
        raise DimensionError(
            f"expected {c.n_rows} row delimiters, found {delims}"
        )
    if len(c.codes) and c.codes[-1] != DELIMITER_CODE:
        raise DimensionError("sequence does not end with a row delimiter")
    base = c.nonterminal_base
    if np.any(c.codes < 0) or np.any(c.codes >= base):
        raise DimensionError("sequence contains out-of-range codes")
    # Columns strictly increase within each row.
    m = c.n_cols
    pair_mask = c.codes != DELIMITER_CODE
    cols = (c.codes[pair_mask] - 1) % m
    rows = (np.cumsum(~pair_mask))[pair_mask]
    if len(cols) > 1:
        same_row = rows[1:] == rows[:-1]
        if np.any(same_row & (cols[1:] <= cols[:-1])):
            raise DimensionError("columns are not strictly increasing within a row")


def _csrv_right_kernel(codes, values, x, n_cols, y):
    row = 0
    acc = 0.0
    for idx in range(codes.shape[0]):
        code = codes[idx]
        if code == 0:
            y[row] = acc
            acc = 0.0
            row += 1
        else:
            t = code - 1
            acc += values[t // n_cols] * x[t % n_cols]


def _csrv_left_kernel(codes, values, y, n_cols, x):
    row = 0
    for idx in range(codes.shape[0]):
        code = codes[idx]
        if code == 0:
            row += 1
        else:
            t = code - 1
            x[t % n_cols] += y[row] * values[t // n_cols]


_csrv_right_fast = jit(_csrv_right_kernel)
_csrv_left_fast = jit(_csrv_left_kernel)


def _check_buffer(v: np.ndarray | None, length: int, name: str) -> np.ndarray:
    """Validate a caller-supplied output buffer without copying it."""
    if v is None:
        return np.empty(length, dtype=np.float64)
    if v.shape != (length,):
        raise DimensionError(f"{name} must have shape ({length},), got {v.shape}")
    if v.dtype != np.float64 or not v.flags.c_contiguous or not v.flags.writeable:
        raise DimensionError(f"{name} must be a writeable contiguous float64 array")
    return v


def csrv_right_mult(c: CsrvMatrix, x: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
    """Compute ``y = M @ x`` by one scan of the sequence."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape != (c.n_cols,):
        raise DimensionError(f"x must have shape ({c.n_cols},), got {x.shape}")
    y = _check_buffer(out, c.n_rows, "out")
    _csrv_right_fast(c.codes, c.values, x, c.n_cols, y)
    return y


def csrv_left_mult(c: CsrvMatrix, y: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
    """Compute ``x^T = y^T M`` by one scan of the sequence."""
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.shape != (c.n_rows,):
        raise DimensionError(f"y must have shape ({c.n_rows},), got {y.shape}")
    x = _check_buffer(out, c.n_cols, "out")
    x[:] = 0.0
    _csrv_left_fast(c.codes, c.values, y, c.n_cols, x)
    return x
