"""Per-indicator parameter grids and best-setting selection.

Each family is swept over a fixed grid on one curve. The winning setting is
the one whose cost lies closest to the oracle baseline's cost; ties go to
the more negative deviation, then to the earlier grid entry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .correlate import DEFAULT_POOL, Coi, coi_series
from .curves import ErrorCurve
from .indicators import (
    Gl, Hnr, IndicatorTrace, Mne, Og, P, Pq, RunOutcome, Up,
    evaluate_trace, oracle_outcome, stop_epoch,
)
from .nemesid import run_cost

__all__ = ["KINDS", "TuneGrid", "SweepRow", "TuneResult", "grid_for", "tune"]

KINDS = ("mne", "gl", "p", "pq", "up", "hnr", "og", "coi")

STRIP = 5


def _steps(lo: float, hi: float, step: float, digits: int = 1) -> list[float]:
    count = int(round((hi - lo) / step)) + 1
    return [round(lo + i * step, digits) for i in range(count)]


@dataclass(frozen=True)
class TuneGrid:
    kind: str
    candidates: tuple

    def __len__(self) -> int:
        return len(self.candidates)


@dataclass(frozen=True)
class SweepRow:
    config: object
    outcome: RunOutcome
    cost: float
    deviation: float

    @property
    def objective(self) -> float:
        return abs(self.deviation)


@dataclass(frozen=True)
class TuneResult:
    kind: str
    best: object
    outcome: RunOutcome
    objective: float
    baseline: RunOutcome
    baseline_cost: float
    sweep: tuple


def grid_for(kind: str, pool: Optional[Sequence] = None, coefficient: str = "pearson",
             k: int = STRIP) -> TuneGrid:
    """The fixed tuning grid for one indicator family.

    ``k`` is the strip length of strip-based families (and the strip count
    of ``up``). ``pool`` and ``coefficient`` only matter for ``coi``; the
    pool defaults to :data:`coistop.correlate.DEFAULT_POOL`.
    """
    if kind == "mne":
        cands = [Mne(m) for m in range(10, 101, 10)]
    elif kind == "gl":
        cands = [Gl(a) for a in _steps(1.0, 5.0, 0.5)]
    elif kind == "p":
        cands = [P(k, a) for a in _steps(1.0, 5.0, 0.5)]
    elif kind == "pq":
        cands = [Pq(k, a) for a in _steps(1.0, 5.0, 0.5)]
    elif kind == "up":
        cands = [Up(k, k)]
    elif kind == "hnr":
        cands = [Hnr(k, a) for a in _steps(5.0, 25.0, 0.5)]
    elif kind == "og":
        cands = [Og(a) for a in _steps(0.5, 5.0, 0.5)]
    elif kind == "coi":
        members = tuple(pool) if pool is not None else DEFAULT_POOL
        cands = [Coi(k, a, coefficient, members) for a in _steps(0.5, 1.0, 0.1)]
    else:
        raise ValueError(f"unknown indicator family {kind!r}; expected one of {KINDS}")
    return TuneGrid(kind, tuple(cands))


def _traces(curve: ErrorCurve, grid: TuneGrid, every_epoch: bool):
    if grid.kind != "coi":
        return [evaluate_trace(curve, c, every_epoch) for c in grid.candidates]
    # all COI candidates share the pool and the criterion series
    first = grid.candidates[0]
    pool_traces = [evaluate_trace(curve, m, every_epoch) for m in first.pool]
    values = coi_series(pool_traces, first.k, first.coefficient)
    aligned = np.arange(1, len(curve) + 1) % first.k == 0
    out = []
    for c in grid.candidates:
        with np.errstate(invalid="ignore"):
            fires = values > c.alpha_corr
        if not every_epoch:
            fires &= aligned
        out.append(IndicatorTrace(c, curve, values, fires))
    return out


def tune(curve: ErrorCurve, kind: str, horizon: int, w_mi: float = 0.5, w_ea: float = 0.5,
         pool: Optional[Sequence] = None, coefficient: str = "pearson",
         every_epoch: bool = False, k: int = STRIP) -> TuneResult:
    """Sweep the grid of ``kind`` on ``curve`` and pick the best setting."""
    if len(curve) < horizon:
        raise ValueError(f"curve {curve.id!r} has {len(curve)} epochs, horizon is {horizon}")
    if kind == "coi" and pool is None:
        raise ValueError("tuning coi needs a pool")
    grid = grid_for(kind, pool, coefficient, k)
    baseline = oracle_outcome(curve, horizon)
    base_cost = run_cost(baseline, w_mi, w_ea)

    rows = []
    for trace in _traces(curve, grid, every_epoch):
        outcome = stop_epoch(trace, horizon)
        cost = run_cost(outcome, w_mi, w_ea)
        rows.append(SweepRow(trace.config, outcome, cost, cost - base_cost))

    best_idx = min(range(len(rows)), key=lambda i: (rows[i].objective, rows[i].deviation, i))
    best = rows[best_idx]
    return TuneResult(
        kind=kind,
        best=best.config,
        outcome=best.outcome,
        objective=best.objective,
        baseline=baseline,
        baseline_cost=base_cost,
        sweep=tuple(rows),
    )
