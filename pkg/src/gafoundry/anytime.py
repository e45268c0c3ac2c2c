"""Attainment-histogram logger and the AUC anytime-performance statistic.

A run attains cell (i, j) of the target x budget grid when its best-so-far
value within the j-th budget bucket reaches the i-th target level.  Per run
the attained set is a staircase (attaining (i, j) implies (i', j') for all
i' <= i, j' >= j), so the logger only records, per target row, the first
budget column reached.  The AUC is the sum over cells of the fraction of
runs attaining the cell; row 0 is the trivial zero target, which every
evaluated run attains (dropping it would shrink the AUC grid by one row).

Counters live in a dense in-memory matrix of 32-bit cells; nothing touches
disk.
"""

from __future__ import annotations

import math

import numpy as np


class ProtocolError(RuntimeError):
    """Raised when observations arrive out of order or past the budget."""


def bucket_index(x: float, lo: float, hi: float, buckets: int) -> int:
    """Linear bucket of x in [lo, hi]: floor((x-lo)/(hi-lo)*buckets).

    x == hi clamps to buckets-1.  Integer inputs take an exact integer path
    so bucket edges never suffer float rounding.
    """
    if buckets < 1:
        raise ValueError(f"buckets must be >= 1, got {buckets}")
    if not lo < hi:
        raise ValueError(f"empty range [{lo}, {hi}]")
    if not lo <= x <= hi:
        raise ValueError(f"value {x} outside [{lo}, {hi}]")
    if x == hi:
        return buckets - 1
    num = (x - lo) * buckets
    den = hi - lo
    if isinstance(num, int) and isinstance(den, int):
        return num // den
    return min(int(math.floor(num / den)), buckets - 1)


class AttainmentHistogram:
    """Discretized 2D ECDF of run attainment over quality and time targets.

    Feed one run at a time: observe(eval_index, value) once per evaluation in
    order, then finalize_run() to commit the run's staircase.  Histograms
    with identical shape, v_max, and budget can be merged.
    """

    def __init__(self, v_max: int, budget: int, target_buckets: int = 100, budget_buckets: int = 100):
        if v_max < 1:
            raise ValueError(f"v_max must be >= 1, got {v_max}")
        if budget < 1:
            raise ValueError(f"budget must be >= 1, got {budget}")
        if target_buckets < 1 or budget_buckets < 1:
            raise ValueError("bucket counts must be >= 1")
        self.v_max = v_max
        self.budget = budget
        self.target_buckets = target_buckets
        self.budget_buckets = budget_buckets
        self.counts = np.zeros((target_buckets, budget_buckets), dtype=np.uint32)
        self.run_count = 0
        self._next_eval = 1
        self._best: int | None = None
        self._rows_reached = -1
        self._first_col = np.zeros(target_buckets, dtype=np.int64)

    @property
    def run_active(self) -> bool:
        return self._next_eval > 1

    def observe(self, eval_index: int, value: int) -> None:
        """Record one evaluation of the active run.

        eval_index must be exactly one past the previous call (starting at 1)
        and must not exceed the budget.
        """
        if eval_index != self._next_eval:
            raise ProtocolError(
                f"out-of-order evaluation index {eval_index}, expected {self._next_eval}"
            )
        if eval_index > self.budget:
            raise ProtocolError(f"evaluation index {eval_index} exceeds budget {self.budget}")
        self._next_eval += 1
        if self._best is None or value > self._best:
            self._best = value
            row = bucket_index(value, 0, self.v_max, self.target_buckets)
            if row > self._rows_reached:
                col = bucket_index(eval_index - 1, 0, self.budget, self.budget_buckets)
                self._first_col[self._rows_reached + 1 : row + 1] = col
                self._rows_reached = row

    def finalize_run(self) -> None:
        """Commit the active run's staircase into the counters."""
        if self._rows_reached >= 0:
            reach = self._first_col[: self._rows_reached + 1, None]
            cols = np.arange(self.budget_buckets, dtype=np.int64)[None, :]
            self.counts[: self._rows_reached + 1] += (cols >= reach).astype(np.uint32)
        self.run_count += 1
        self._next_eval = 1
        self._best = None
        self._rows_reached = -1

    def auc(self) -> float:
        """Sum over cells of the attainment fraction, in [0, rows*cols]."""
        if self.run_count == 0:
            raise ValueError("AUC is undefined before any run is finalized")
        return float(self.counts.sum(dtype=np.int64)) / self.run_count

    def fractions(self) -> np.ndarray:
        if self.run_count == 0:
            raise ValueError("attainment fractions are undefined before any run")
        return self.counts.astype(np.float64) / self.run_count

    def to_csv(self) -> str:
        """Header of budget-bucket upper edges, then one fraction row per target bucket."""
        edges = [(j + 1) * self.budget / self.budget_buckets for j in range(self.budget_buckets)]
        lines = [",".join(str(e) for e in edges)]
        for row in self.fractions():
            lines.append(",".join(str(v) for v in row.tolist()))
        return "\n".join(lines) + "\n"


def merge(a: AttainmentHistogram, b: AttainmentHistogram) -> AttainmentHistogram:
    """Cellwise sum of two compatible histograms (commutative, empty-neutral)."""
    if (a.v_max, a.budget, a.target_buckets, a.budget_buckets) != (
        b.v_max,
        b.budget,
        b.target_buckets,
        b.budget_buckets,
    ):
        raise ValueError("histogram shapes or bounds differ")
    if a.run_active or b.run_active:
        raise ValueError("cannot merge histograms with a run in progress")
    out = AttainmentHistogram(a.v_max, a.budget, a.target_buckets, a.budget_buckets)
    out.counts = a.counts + b.counts
    out.run_count = a.run_count + b.run_count
    return out
