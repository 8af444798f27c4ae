"""NEMESID: normalized cost deviation of runs from the oracle baseline.

A run's cost is ``w_mi * stop_epoch + w_ea * val_error_at_stop``. Within a
local testing frame (all runs on one curve plus the oracle baseline) the
deviation of a run's cost from the baseline's is divided by the largest such
deviation in the frame, which puts every score in ``[-1, 1]`` with the
baseline at exactly 0. Lower absolute values are better, negative preferred.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Optional, Sequence

from .curves import ErrorCurve
from .indicators import RunOutcome, oracle_outcome, oracle_stop, run_indicator

__all__ = [
    "DEFAULT_WEIGHTS",
    "Frame",
    "RunScore",
    "FrameReport",
    "run_cost",
    "mcdb",
    "phi",
    "build_frame",
    "frame_report",
    "rank_key",
    "five_number_summary",
]

DEFAULT_WEIGHTS = (0.5, 0.5)


def _check_weights(w_mi: float, w_ea: float) -> None:
    for name, w in (("w_mi", w_mi), ("w_ea", w_ea)):
        if not (0.0 < w <= 1.0):
            raise ValueError(f"{name} must lie in (0, 1], got {w}")


@dataclass(frozen=True)
class Frame:
    """All runs on one curve within ``horizon``, with the oracle baseline.

    ``names`` labels the runs; it defaults to each indicator's label.
    """

    kernel_id: str
    curve: ErrorCurve
    horizon: int
    baseline: RunOutcome
    runs: tuple
    names: tuple = ()

    def __post_init__(self):
        runs = tuple(self.runs)
        names = tuple(self.names) or tuple(r.indicator.label() for r in runs)
        if len(names) != len(runs):
            raise ValueError("one name per run is required")
        if len(set(names)) != len(names):
            raise ValueError(f"run names must be unique: {names}")
        if self.baseline.stop_epoch != oracle_stop(self.curve, self.horizon):
            raise ValueError("baseline does not stop at the oracle epoch")
        for r in runs:
            if not 1 <= r.stop_epoch <= self.horizon:
                raise ValueError(f"run stops at {r.stop_epoch}, outside 1..{self.horizon}")
        object.__setattr__(self, "runs", runs)
        object.__setattr__(self, "names", names)


def run_cost(outcome: RunOutcome, w_mi: float = 0.5, w_ea: float = 0.5) -> float:
    """Model-induction plus error-acquisition cost of a run."""
    _check_weights(w_mi, w_ea)
    return w_mi * outcome.stop_epoch + w_ea * outcome.val_error_at_stop


def mcdb(frame: Frame, w_mi: float = 0.5, w_ea: float = 0.5) -> float:
    """Largest absolute cost deviation from the baseline over the frame.

    Out-of-range runs and the baseline itself take part.
    """
    base = run_cost(frame.baseline, w_mi, w_ea)
    deviations = [abs(run_cost(r, w_mi, w_ea) - base) for r in frame.runs]
    return max(deviations + [0.0])


def _phi(cost: float, base: float, spread: float) -> float:
    if spread == 0:
        return 0.0
    return (cost - base + spread) / spread - 1.0


def phi(outcome: RunOutcome, frame: Frame, w_mi: float = 0.5, w_ea: float = 0.5) -> float:
    """NEMESID score of ``outcome`` within ``frame``."""
    return _phi(
        run_cost(outcome, w_mi, w_ea),
        run_cost(frame.baseline, w_mi, w_ea),
        mcdb(frame, w_mi, w_ea),
    )


@dataclass(frozen=True)
class RunScore:
    name: str
    outcome: RunOutcome
    cost: float
    phi: float
    rank: int

    @property
    def out_of_range(self) -> bool:
        return self.outcome.out_of_range


@dataclass(frozen=True)
class FrameReport:
    """Scored and ranked runs of one frame.

    ``scores`` is ordered by rank. ``mean`` and ``variance`` (population) are
    taken over the runs' scores, baseline excluded.
    """

    kernel_id: str
    horizon: int
    baseline: RunOutcome
    baseline_cost: float
    scores: tuple
    mcdb: float
    weights: tuple
    mean: Optional[float] = None
    variance: Optional[float] = None

    def by_name(self) -> dict:
        return {s.name: s for s in self.scores}


def rank_key(phi_value: float, out_of_range: bool, name: str):
    """Sort key: in-range runs first, then ``|phi|``, signed ``phi``, name."""
    return (bool(out_of_range), abs(phi_value), phi_value, name)


def build_frame(curve: ErrorCurve, configs: Sequence, horizon: int,
                names: Sequence[str] = (), every_epoch: bool = False,
                kernel_id: Optional[str] = None) -> Frame:
    """Run every config on ``curve`` and assemble the frame."""
    if len(curve) < horizon:
        raise ValueError(f"curve {curve.id!r} has {len(curve)} epochs, horizon is {horizon}")
    runs = tuple(run_indicator(curve, c, horizon, every_epoch) for c in configs)
    return Frame(
        kernel_id if kernel_id is not None else curve.id,
        curve,
        horizon,
        oracle_outcome(curve, horizon),
        runs,
        tuple(names),
    )


def frame_report(frame: Frame, w_mi: float = 0.5, w_ea: float = 0.5) -> FrameReport:
    base = run_cost(frame.baseline, w_mi, w_ea)
    spread = mcdb(frame, w_mi, w_ea)
    scored = []
    for name, run in zip(frame.names, frame.runs):
        cost = run_cost(run, w_mi, w_ea)
        scored.append((name, run, cost, _phi(cost, base, spread)))
    scored.sort(key=lambda t: rank_key(t[3], t[1].out_of_range, t[0]))
    scores = tuple(
        RunScore(name, run, cost, value, rank)
        for rank, (name, run, cost, value) in enumerate(scored, start=1)
    )
    phis = [s.phi for s in scores]
    return FrameReport(
        kernel_id=frame.kernel_id,
        horizon=frame.horizon,
        baseline=frame.baseline,
        baseline_cost=base,
        scores=scores,
        mcdb=spread,
        weights=(w_mi, w_ea),
        mean=statistics.fmean(phis) if phis else None,
        variance=statistics.pvariance(phis) if phis else None,
    )


def five_number_summary(values: Sequence[float]) -> dict:
    """Minimum, quartiles (inclusive method) and maximum."""
    values = sorted(values)
    if not values:
        raise ValueError("no values")
    if len(values) == 1:
        q1 = median = q3 = values[0]
    else:
        q1, median, q3 = statistics.quantiles(values, n=4, method="inclusive")
    return {"min": values[0], "q1": q1, "median": median, "q3": q3, "max": values[-1]}
