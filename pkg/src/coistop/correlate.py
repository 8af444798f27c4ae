"""Correlation coefficients, the correlation-of-indicators (COI) rule, and
an empirical conjunctive-fork checker.

The COI criterion at epoch ``e`` looks at the firing windows of a pool of
indicators over the last ``k`` epochs. Every pair of distinct pool members
that both fire somewhere in the window contributes the correlation of
their 0/1 windows; the criterion is the largest contribution, floored at 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar, Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .curves import ErrorCurve
from .indicators import IndicatorTrace, Oracle, _Config, evaluate_trace, parse_pool

__all__ = [
    "Coi",
    "ForkReport",
    "DEFAULT_POOL_SPEC",
    "DEFAULT_POOL",
    "COEFFICIENTS",
    "pearson",
    "spearman",
    "rankdata",
    "coi_value",
    "coi_fires",
    "coi_series",
    "coi_trace",
    "fork_check",
]

COEFFICIENTS = ("pearson", "spearman")

DEFAULT_POOL_SPEC = "gl:1.0,p:5:1.0,pq:5:1.0,up:5:5,hnr:5:5.0,og:0.5"


@dataclass(frozen=True)
class Coi(_Config):
    """Fires when two pool indicators' firing windows correlate above ``alpha_corr``."""

    k: int
    alpha_corr: float
    coefficient: str = "pearson"
    pool: tuple = field(default=(), compare=True)
    name: ClassVar[str] = "coi"
    strip_based: ClassVar[bool] = True

    def __post_init__(self):
        if isinstance(self.k, bool) or not isinstance(self.k, (int, np.integer)) or self.k < 2:
            raise ValueError(f"k must be an integer >= 2, got {self.k!r}")
        if not (0.0 <= self.alpha_corr <= 1.0):
            raise ValueError(f"alpha_corr must lie in [0, 1], got {self.alpha_corr}")
        if self.coefficient not in COEFFICIENTS:
            raise ValueError(f"unknown coefficient {self.coefficient!r}")
        pool = tuple(self.pool)
        if len(pool) < 2:
            raise ValueError("COI pool needs at least two indicators")
        for member in pool:
            if isinstance(member, (Coi, Oracle)):
                raise ValueError(f"{member.name} cannot be a COI pool member")
        if len(set(pool)) != len(pool):
            raise ValueError("COI pool members must be pairwise distinct")
        object.__setattr__(self, "pool", pool)

    def _param_items(self):
        return [("k", self.k), ("alpha", self.alpha_corr), ("coef", self.coefficient)]

    def label(self) -> str:
        return f"coi[{self.coefficient},{self.k},{self.alpha_corr}]"


DEFAULT_POOL = parse_pool(DEFAULT_POOL_SPEC)


# ---------------------------------------------------------------------------
# coefficients
# ---------------------------------------------------------------------------

def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError("inputs must be one-dimensional sequences of equal length")
    if x.size < 2:
        raise ValueError("correlation needs at least two observations")
    return x, y


def pearson(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    """Product-moment correlation, or ``None`` if either input is constant."""
    x, y = _pair(x, y)
    if np.all(x == x[0]) or np.all(y == y[0]):
        return None
    dx = x - x.mean()
    dy = y - y.mean()
    r = (dx * dy).sum() / np.sqrt((dx * dx).sum() * (dy * dy).sum())
    return float(min(1.0, max(-1.0, r)))


def rankdata(x: Sequence[float]) -> np.ndarray:
    """1-based ranks, ties receiving the average of the ranks they span."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(x.size)
    sx = x[order]
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    """Rank-order correlation (Pearson on average ranks)."""
    x, y = _pair(x, y)
    return pearson(rankdata(x), rankdata(y))


# ---------------------------------------------------------------------------
# COI
# ---------------------------------------------------------------------------

def _pair_score(wi: np.ndarray, wj: np.ndarray, coefficient: str) -> Optional[float]:
    if not (wi.any() and wj.any()):
        return None
    const_i = np.all(wi == wi[0])
    const_j = np.all(wj == wj[0])
    if const_i and const_j:
        # both windows fire at every epoch: complete agreement
        return 1.0
    if const_i or const_j:
        return None
    corr = pearson if coefficient == "pearson" else spearman
    return corr(wi, wj)


def coi_value(traces: Sequence[IndicatorTrace], cfg: Coi, e: int) -> Optional[float]:
    """COI criterion at epoch ``e`` over the firing series in ``traces``.

    Returns ``None`` when ``e < cfg.k``.
    """
    k = cfg.k
    if e < k:
        return None
    windows = []
    for t in traces:
        if e > len(t):
            raise ValueError(f"epoch {e} beyond trace length {len(t)}")
        windows.append(t.fires[e - k:e].astype(np.float64))
    best = 0.0
    for i in range(len(windows)):
        for j in range(i + 1, len(windows)):
            score = _pair_score(windows[i], windows[j], cfg.coefficient)
            if score is not None and score > best:
                best = score
    return best


def coi_fires(traces: Sequence[IndicatorTrace], cfg: Coi, e: int) -> bool:
    if e % cfg.k != 0:
        return False
    value = coi_value(traces, cfg, e)
    return value is not None and value > cfg.alpha_corr


def _rank_rows(w: np.ndarray) -> np.ndarray:
    less = (w[:, None, :] < w[:, :, None]).sum(axis=2)
    equal = (w[:, None, :] == w[:, :, None]).sum(axis=2)
    return less + (equal + 1) / 2.0


def _row_pearson(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    da = a - a.mean(axis=1, keepdims=True)
    db = b - b.mean(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = (da * db).sum(axis=1) / np.sqrt((da * da).sum(axis=1) * (db * db).sum(axis=1))
    return np.clip(r, -1.0, 1.0)


def coi_series(traces: Sequence[IndicatorTrace], k: int, coefficient: str = "pearson") -> np.ndarray:
    """COI criterion at every epoch (``NaN`` before epoch ``k``)."""
    if not traces:
        raise ValueError("no traces given")
    n = len(traces[0])
    out = np.full(n, np.nan)
    if n < k:
        return out
    wins = [sliding_window_view(t.fires.astype(np.float64), k) for t in traces]
    fired = [w.any(axis=1) for w in wins]
    const = [np.all(w == w[:, :1], axis=1) for w in wins]
    if coefficient == "spearman":
        ranked = [_rank_rows(w) for w in wins]
    else:
        ranked = wins
    best = np.zeros(n - k + 1)
    for i in range(len(wins)):
        for j in range(i + 1, len(wins)):
            ok = fired[i] & fired[j]
            both_const = ok & const[i] & const[j]
            varying = ok & ~const[i] & ~const[j]
            score = np.full(best.size, -np.inf)
            score[both_const] = 1.0
            if varying.any():
                score[varying] = _row_pearson(ranked[i][varying], ranked[j][varying])
            best = np.maximum(best, score)
    out[k - 1:] = best
    return out


def coi_trace(curve: ErrorCurve, cfg: Coi, every_epoch: bool = False,
              pool_traces: Optional[Sequence[IndicatorTrace]] = None) -> IndicatorTrace:
    """Evaluate the COI rule on ``curve``.

    ``pool_traces`` may be passed to reuse already evaluated pool members.
    """
    if pool_traces is None:
        pool_traces = [evaluate_trace(curve, m, every_epoch) for m in cfg.pool]
    values = coi_series(pool_traces, cfg.k, cfg.coefficient)
    with np.errstate(invalid="ignore"):
        fires = values > cfg.alpha_corr
    if not every_epoch:
        fires &= np.arange(1, len(curve) + 1) % cfg.k == 0
    return IndicatorTrace(cfg, curve, values, fires)


# ---------------------------------------------------------------------------
# conjunctive fork
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ForkReport:
    """Outcome of checking the common-cause conditions on Boolean samples.

    ``frequencies`` holds the empirical probabilities used, keyed as
    ``a``, ``b``, ``ab`` (unconditional) and ``a|c``, ``b|c``, ``ab|c``,
    ``a|~c``, ``b|~c``, ``ab|~c``, plus ``c``.
    """

    corr_holds: bool
    screen_c: bool
    screen_not_c: bool
    cause_a: bool
    cause_b: bool
    frequencies: dict

    @property
    def is_fork(self) -> bool:
        return all((self.corr_holds, self.screen_c, self.screen_not_c, self.cause_a, self.cause_b))


def fork_check(a, b, c, tol: float) -> ForkReport:
    """Test whether ``c`` behaves as a common cause of ``a`` and ``b``.

    Equalities hold when both sides are within ``tol``; strict inequalities
    hold when the left side exceeds the right by more than ``tol``, so a
    difference indistinguishable from equality never counts as "greater".
    """
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    c = np.asarray(c, dtype=bool)
    if a.ndim != 1 or a.shape != b.shape or a.shape != c.shape:
        raise ValueError("a, b and c must be one-dimensional and of equal length")
    if a.size == 0:
        raise ValueError("no samples")
    if tol < 0:
        raise ValueError("tol must be non-negative")
    if c.all() or not c.any():
        raise ValueError("c is constant; conditional frequencies are degenerate")

    ab = a & b
    nc = ~c
    f = {
        "a": a.mean(), "b": b.mean(), "ab": ab.mean(), "c": c.mean(),
        "a|c": a[c].mean(), "b|c": b[c].mean(), "ab|c": ab[c].mean(),
        "a|~c": a[nc].mean(), "b|~c": b[nc].mean(), "ab|~c": ab[nc].mean(),
    }
    f = {key: float(v) for key, v in f.items()}
    return ForkReport(
        corr_holds=f["ab"] - f["a"] * f["b"] > tol,
        screen_c=abs(f["ab|c"] - f["a|c"] * f["b|c"]) <= tol,
        screen_not_c=abs(f["ab|~c"] - f["a|~c"] * f["b|~c"]) <= tol,
        cause_a=f["a|c"] - f["a|~c"] > tol,
        cause_b=f["b|c"] - f["b|~c"] > tol,
        frequencies=f,
    )
