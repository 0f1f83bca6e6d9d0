"""Row-aligned blocking: independent grammars per row block, one shared dictionary.

A matrix split into ``b`` blocks of ``ceil(n_rows / b)`` rows (the last block
may be smaller) compresses each block separately.  The right product writes
disjoint slices of ``y`` so blocks parallelize freely; the left product sums
per-block partial vectors in ascending block order, which keeps results
bitwise identical for every worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .csrv import CsrvMatrix, build_csrv, csrv_left_mult, csrv_right_mult, decode_csrv
from .errors import DimensionError
from .grammar import Grammar, compress, expand
from .multiply import left_mult, right_mult
from .repair import DEFAULT_BUCKET_LIMIT


@dataclass(frozen=True)
class BlockedMatrix:
    """Row blocks (grammars or plain pair sequences) over one value dictionary."""

    n_rows: int
    n_cols: int
    values: np.ndarray
    blocks: tuple[Grammar | CsrvMatrix, ...]
    row_starts: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        self.values.flags.writeable = False
        if not self.blocks:
            raise DimensionError("a blocked matrix needs at least one block")
        starts = []
        row = 0
        for blk in self.blocks:
            starts.append(row)
            row += blk.n_rows
        if row != self.n_rows:
            raise DimensionError(
                f"block rows sum to {row}, expected {self.n_rows}"
            )
        object.__setattr__(self, "row_starts", tuple(starts))

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)


def resolve_workers(workers: int | None) -> int:
    """Explicit count, else the GRAMLIN_WORKERS variable, else the CPU count."""
    if workers is not None:
        if workers < 1:
            raise DimensionError("workers must be >= 1")
        return workers
    env = os.environ.get("GRAMLIN_WORKERS", "")
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise DimensionError(f"GRAMLIN_WORKERS is not an integer: {env!r}") from exc
        if value < 1:
            raise DimensionError("GRAMLIN_WORKERS must be >= 1")
        return value
    return os.cpu_count() or 1


def _run_per_block(tasks, workers: int):
    """Run callables, in a thread pool when it can actually help."""
    if workers <= 1 or len(tasks) <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(lambda task: task(), tasks))


def split_csrv(c: CsrvMatrix, n_blocks: int) -> list[CsrvMatrix]:
    """Cut the sequence into row-aligned blocks of ``ceil(n_rows / n_blocks)`` rows."""
    if n_blocks < 1:
        raise DimensionError("block count must be >= 1")
    n_blocks = min(n_blocks, max(1, c.n_rows))
    rows_per = max(1, -(-c.n_rows // n_blocks))
    delim_pos = np.flatnonzero(c.codes == 0)
    blocks = []
    start = 0  # sequence offset of the current block
    for first_row in range(0, max(1, c.n_rows), rows_per):
        last_row = min(first_row + rows_per, c.n_rows)
        end = delim_pos[last_row - 1] + 1 if last_row > first_row else start
        blocks.append(
            CsrvMatrix(
                n_rows=last_row - first_row,
                n_cols=c.n_cols,
                values=c.values,
                codes=c.codes[start:end].copy(),
            )
        )
        start = end
    return blocks


def build_blocked(
    matrix: np.ndarray | CsrvMatrix,
    n_blocks: int = 1,
    workers: int | None = None,
    bucket_limit: int = DEFAULT_BUCKET_LIMIT,
) -> BlockedMatrix:
    """Compress a matrix into per-block grammars sharing one dictionary."""
    c = matrix if isinstance(matrix, CsrvMatrix) else build_csrv(matrix)
    parts = split_csrv(c, n_blocks)
    workers = resolve_workers(workers)
    tasks = [lambda part=part: compress(part, bucket_limit) for part in parts]
    grammars = _run_per_block(tasks, workers)
    return BlockedMatrix(
        n_rows=c.n_rows, n_cols=c.n_cols, values=c.values, blocks=tuple(grammars)
    )


def blocked_csrv(matrix: np.ndarray | CsrvMatrix, n_blocks: int = 1) -> BlockedMatrix:
    """Blocked form that keeps raw pair sequences instead of grammars."""
    c = matrix if isinstance(matrix, CsrvMatrix) else build_csrv(matrix)
    parts = split_csrv(c, n_blocks)
    return BlockedMatrix(
        n_rows=c.n_rows, n_cols=c.n_cols, values=c.values, blocks=tuple(parts)
    )


def decode_blocked(bm: BlockedMatrix) -> np.ndarray:
    """Reconstruct the dense matrix from all blocks."""
    dense = np.empty((bm.n_rows, bm.n_cols), dtype=np.float64)
    for start, blk in zip(bm.row_starts, bm.blocks):
        part = blk if isinstance(blk, CsrvMatrix) else expand(blk)
        dense[start : start + blk.n_rows] = decode_csrv(part)
    return dense


def blocked_right_mult(
    bm: BlockedMatrix, x: np.ndarray, workers: int | None = None
) -> np.ndarray:
    """``y = M @ x`` with each block writing its own slice of ``y``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape != (bm.n_cols,):
        raise DimensionError(f"x must have shape ({bm.n_cols},), got {x.shape}")
    y = np.empty(bm.n_rows, dtype=np.float64)
    workers = resolve_workers(workers)

    def task_for(start: int, blk: Grammar | CsrvMatrix):
        out = y[start : start + blk.n_rows]
        if isinstance(blk, CsrvMatrix):
            return lambda: csrv_right_mult(blk, x, out=out)
        return lambda: right_mult(blk, x, out=out)

    tasks = [task_for(s, blk) for s, blk in zip(bm.row_starts, bm.blocks)]
    _run_per_block(tasks, workers)
    return y


def blocked_left_mult(
    bm: BlockedMatrix, y: np.ndarray, workers: int | None = None
) -> np.ndarray:
    """``x^T = y^T M``: per-block partials, summed in fixed block order."""
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.shape != (bm.n_rows,):
        raise DimensionError(f"y must have shape ({bm.n_rows},), got {y.shape}")
    workers = resolve_workers(workers)

    def task_for(start: int, blk: Grammar | CsrvMatrix):
        ypart = y[start : start + blk.n_rows]
        if isinstance(blk, CsrvMatrix):
            return lambda: csrv_left_mult(blk, ypart)
        return lambda: left_mult(blk, ypart)

    tasks = [task_for(s, blk) for s, blk in zip(bm.row_starts, bm.blocks)]
    partials = _run_per_block(tasks, workers)
    x = np.zeros(bm.n_cols, dtype=np.float64)
    for part in partials:  # ascending block order, independent of workers
        x += part
    return x
