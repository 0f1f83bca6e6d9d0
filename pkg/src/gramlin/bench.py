"""Alternating multiplication benchmark over a compressed matrix.

Each iteration computes ``y = M x`` then ``z^T = y^T M`` and renormalizes,
``x <- z / ||z||_inf``, mimicking a power-iteration workload that exercises
both multiplication directions.  Reports are flat ``key=value`` pairs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .blocking import BlockedMatrix, blocked_left_mult, blocked_right_mult, resolve_workers
from .errors import DimensionError


@dataclass(frozen=True)
class BenchConfig:
    """Knobs of one benchmark run."""

    iterations: int = 500
    workers: int | None = None
    seed: int | None = None  # None: deterministic all-ones start vector

    def start_vector(self, n_cols: int) -> np.ndarray:
        if self.seed is None:
            return np.ones(n_cols, dtype=np.float64)
        return np.random.default_rng(self.seed).standard_normal(n_cols)


@dataclass(frozen=True)
class BenchReport:
    """Timing and outcome of one benchmark run."""

    iterations: int
    completed: int
    workers: int
    total_seconds: float
    avg_iter_seconds: float
    early_exit: bool  # the iterate collapsed to the zero vector
    x_checksum: float  # sum of the final iterate, a cheap cross-run probe
    x_final: np.ndarray = field(repr=False)

    def as_dict(self) -> dict[str, object]:
        return {
            "iterations": self.iterations,
            "completed": self.completed,
            "workers": self.workers,
            "total_seconds": round(self.total_seconds, 6),
            "avg_iter_seconds": round(self.avg_iter_seconds, 9),
            "early_exit": int(self.early_exit),
            "x_checksum": repr(self.x_checksum),
        }


def run_bench(bm: BlockedMatrix, config: BenchConfig | None = None) -> BenchReport:
    """Alternate right and left products for the configured iteration count."""
    config = config or BenchConfig()
    if config.iterations < 1:
        raise DimensionError("benchmark needs at least one iteration")
    workers = resolve_workers(config.workers)
    x = config.start_vector(bm.n_cols)
    early = False
    completed = 0
    start = time.perf_counter()
    for _ in range(config.iterations):
        y = blocked_right_mult(bm, x, workers=workers)
        z = blocked_left_mult(bm, y, workers=workers)
        completed += 1
        norm = float(np.max(np.abs(z))) if len(z) else 0.0
        if norm == 0.0 or not np.isfinite(norm):
            early = True
            x = z
            break
        x = z / norm
    total = time.perf_counter() - start
    return BenchReport(
        iterations=config.iterations,
        completed=completed,
        workers=workers,
        total_seconds=total,
        avg_iter_seconds=total / completed,
        early_exit=early,
        x_checksum=float(x.sum()),
        x_final=x,
    )
