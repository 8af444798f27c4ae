"""Online stopping indicators over error curves.

Each indicator is described by a small frozen config object (``Gl``, ``P``,
``Pq``, ``Up``, ``Hnr``, ``Og``, ``Mne``, plus ``Oracle`` for the omniscient
baseline). :func:`evaluate_trace` turns a config and a curve into an
:class:`IndicatorTrace`; :func:`stop_epoch` reads the first firing epoch
within a horizon off a trace.

Scalar helpers (``gl_value`` and friends) take a 1-based epoch and return
``None`` where the criterion is undefined. Trace arrays use ``NaN`` for the
same purpose.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import ClassVar, Optional, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .curves import ErrorCurve

__all__ = [
    "Gl", "P", "Pq", "Up", "Hnr", "Og", "Mne", "Oracle",
    "IndicatorTrace", "RunOutcome",
    "PQ_EPSILON",
    "optimal_error", "gl_value", "p_value", "pq_value", "up_fires",
    "hnr_value", "og_value", "oracle_stop",
    "gl_series", "p_series", "pq_series", "up_series", "hnr_series", "og_series",
    "evaluate_trace", "stop_epoch", "oracle_outcome", "run_indicator",
    "parse_indicator", "parse_pool", "format_indicator",
]

# p at or below this value makes pq undefined
PQ_EPSILON = 1e-9


def _check_threshold(alpha: float) -> None:
    if not np.isfinite(alpha):
        raise ValueError(f"threshold must be finite, got {alpha}")


def _check_int(name: str, value: int, minimum: int) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")


class _Config:
    name: ClassVar[str]
    strip_based: ClassVar[bool] = False

    def params(self) -> str:
        """Parameters as ``key=value`` pairs joined by ``;``."""
        return ";".join(f"{k}={v}" for k, v in self._param_items())

    def _param_items(self):
        return [(f.name, getattr(self, f.name)) for f in fields(self)]

    def label(self) -> str:
        inner = ",".join(str(v) for _, v in self._param_items())
        return f"{self.name}[{inner}]"

    def sort_key(self):
        return tuple(v for _, v in self._param_items())


@dataclass(frozen=True)
class Gl(_Config):
    """Generalization loss above ``alpha`` percent."""

    alpha: float
    name: ClassVar[str] = "gl"

    def __post_init__(self):
        _check_threshold(self.alpha)


@dataclass(frozen=True)
class P(_Config):
    """Training progress over a strip of ``k`` epochs below ``alpha``."""

    k: int
    alpha: float
    scale: float = 100.0
    name: ClassVar[str] = "p"
    strip_based: ClassVar[bool] = True

    def __post_init__(self):
        _check_int("k", self.k, 2)
        _check_threshold(self.alpha)
        _check_threshold(self.scale)
        if self.scale < 0:
            raise ValueError(f"scale must be non-negative, got {self.scale}")

    def _param_items(self):
        items = [("k", self.k), ("alpha", self.alpha)]
        if self.scale != 100.0:
            items.append(("scale", self.scale))
        return items


@dataclass(frozen=True)
class Pq(_Config):
    """Generalization loss over progress above ``alpha``."""

    k: int
    alpha: float
    name: ClassVar[str] = "pq"
    strip_based: ClassVar[bool] = True

    def __post_init__(self):
        _check_int("k", self.k, 2)
        _check_threshold(self.alpha)


@dataclass(frozen=True)
class Up(_Config):
    """Validation error rising across ``s`` consecutive strips of length ``k``."""

    s: int
    k: int
    name: ClassVar[str] = "up"
    strip_based: ClassVar[bool] = True

    def __post_init__(self):
        _check_int("s", self.s, 1)
        _check_int("k", self.k, 1)


@dataclass(frozen=True)
class Hnr(_Config):
    """High noise ratio of training error over a strip above ``alpha``."""

    k: int
    alpha: float
    name: ClassVar[str] = "hnr"
    strip_based: ClassVar[bool] = True

    def __post_init__(self):
        _check_int("k", self.k, 2)
        _check_threshold(self.alpha)


@dataclass(frozen=True)
class Og(_Config):
    """Overfitting gain (train/validation gap over its running minimum) above ``alpha``."""

    alpha: float
    name: ClassVar[str] = "og"

    def __post_init__(self):
        _check_threshold(self.alpha)


@dataclass(frozen=True)
class Mne(_Config):
    """Primary rule: stop once ``m`` epochs have run."""

    m: int
    name: ClassVar[str] = "mne"

    def __post_init__(self):
        _check_int("m", self.m, 1)


@dataclass(frozen=True)
class Oracle(_Config):
    """Omniscient baseline: earliest validation minimum within horizon ``h``."""

    h: int
    name: ClassVar[str] = "oracle"

    def __post_init__(self):
        _check_int("h", self.h, 1)


IndicatorConfig = Union[Gl, P, Pq, Up, Hnr, Og, Mne, Oracle, "Coi"]  # noqa: F821


@dataclass(frozen=True, eq=False)
class IndicatorTrace:
    """Per-epoch criterion values and firing flags of one indicator on one curve.

    ``values[e - 1]`` is ``NaN`` where the criterion is undefined at epoch ``e``.
    """

    config: object
    curve: ErrorCurve
    values: np.ndarray
    fires: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        fires = np.asarray(self.fires, dtype=bool) & ~np.isnan(values)
        if values.shape != (len(self.curve),) or fires.shape != values.shape:
            raise ValueError("trace length must match the curve length")
        values.setflags(write=False)
        fires.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "fires", fires)

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.values)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class RunOutcome:
    """Where a run governed by ``indicator`` stops within the horizon."""

    indicator: object
    stop_epoch: int
    out_of_range: bool
    val_error_at_stop: float


# ---------------------------------------------------------------------------
# scalar criteria (1-based epoch)
# ---------------------------------------------------------------------------

def _check_epoch(curve: ErrorCurve, e: int) -> None:
    if not 1 <= e <= len(curve):
        raise ValueError(f"epoch {e} outside 1..{len(curve)}")


def optimal_error(curve: ErrorCurve, e: int) -> float:
    """Lowest validation error observed up to and including epoch ``e``."""
    _check_epoch(curve, e)
    return float(np.min(curve.val_error[:e]))


def gl_value(curve: ErrorCurve, e: int) -> Optional[float]:
    _check_epoch(curve, e)
    op = optimal_error(curve, e)
    if op <= 0:
        return None
    return 100.0 * (float(curve.val_error[e - 1]) / op - 1.0)


def p_value(curve: ErrorCurve, e: int, k: int, scale: float = 100.0) -> Optional[float]:
    _check_epoch(curve, e)
    if e < k:
        return None
    strip = curve.train_error[e - k:e]
    low = float(np.min(strip))
    if low <= 0:
        return None
    return max(0.0, scale * (float(np.sum(strip)) / (k * low) - 1.0))


def pq_value(curve: ErrorCurve, e: int, k: int, scale: float = 100.0) -> Optional[float]:
    gl = gl_value(curve, e)
    p = p_value(curve, e, k, scale)
    if gl is None or p is None or p <= PQ_EPSILON:
        return None
    return gl / p


def up_fires(curve: ErrorCurve, e: int, s: int, k: int) -> bool:
    """Whether validation error rose at each of the last ``s`` strip boundaries.

    Returns ``False`` when fewer than ``s * k + 1`` epochs are available.
    """
    _check_epoch(curve, e)
    if e - s * k < 1:
        return False
    va = curve.val_error
    return all(va[e - 1 - j * k] > va[e - 1 - (j + 1) * k] for j in range(s))


def hnr_value(curve: ErrorCurve, e: int, k: int) -> Optional[float]:
    _check_epoch(curve, e)
    if e - k - 2 < 1:
        return None
    tr = curve.train_error
    idx = np.arange(e - k, e) - 1  # 0-based positions of epochs e-k .. e-1
    den = float(np.sum(tr[idx]))
    if den == 0:
        return None
    num = float(np.sum(tr[idx] - 2.0 * tr[idx - 1] + tr[idx - 2]))
    return num / den


def og_value(curve: ErrorCurve, e: int) -> float:
    _check_epoch(curve, e)
    gap = np.abs(curve.train_error[:e] - curve.val_error[:e])
    return float(gap[-1] - np.min(gap))


def oracle_stop(curve: ErrorCurve, h: int) -> int:
    """Earliest epoch in ``1..h`` attaining the minimum validation error."""
    if not 1 <= h <= len(curve):
        raise ValueError(f"horizon {h} outside 1..{len(curve)}")
    return int(np.argmin(curve.val_error[:h])) + 1


# ---------------------------------------------------------------------------
# whole-curve series (0-based arrays, NaN = undefined)
# ---------------------------------------------------------------------------

def _nan(n: int) -> np.ndarray:
    return np.full(n, np.nan)


def gl_series(curve: ErrorCurve) -> np.ndarray:
    va = curve.val_error
    op = np.minimum.accumulate(va)
    out = _nan(va.size)
    ok = op > 0
    out[ok] = 100.0 * (va[ok] / op[ok] - 1.0)
    return out


def p_series(curve: ErrorCurve, k: int, scale: float = 100.0) -> np.ndarray:
    tr = curve.train_error
    out = _nan(tr.size)
    if tr.size < k:
        return out
    windows = sliding_window_view(tr, k)
    sums = windows.sum(axis=1)
    lows = windows.min(axis=1)
    ok = lows > 0
    vals = _nan(lows.size)
    vals[ok] = np.maximum(0.0, scale * (sums[ok] / (k * lows[ok]) - 1.0))
    out[k - 1:] = vals
    return out


def pq_series(curve: ErrorCurve, k: int, scale: float = 100.0) -> np.ndarray:
    gl = gl_series(curve)
    p = p_series(curve, k, scale)
    out = _nan(gl.size)
    ok = ~np.isnan(gl) & ~np.isnan(p) & (p > PQ_EPSILON)
    out[ok] = gl[ok] / p[ok]
    return out


def up_series(curve: ErrorCurve, s: int, k: int) -> np.ndarray:
    """1.0 where the uninterrupted-progress condition holds, 0.0 where it fails."""
    va = curve.val_error
    n = va.size
    out = _nan(n)
    if n <= s * k:
        return out
    rises = np.zeros(n, dtype=bool)
    rises[k:] = va[k:] > va[:-k]
    held = rises.copy()
    for j in range(1, s):
        shifted = np.zeros(n, dtype=bool)
        shifted[j * k:] = rises[: n - j * k]
        held &= shifted
    out[s * k:] = held[s * k:].astype(np.float64)
    return out


def hnr_series(curve: ErrorCurve, k: int) -> np.ndarray:
    tr = curve.train_error
    n = tr.size
    out = _nan(n)
    # the value at epoch e needs epochs e-k-2 .. e-1
    if n < k + 3:
        return out
    # second[a] is the second difference anchored at epoch a + 3
    second = tr[2:] - 2.0 * tr[1:-1] + tr[:-2]
    # window a covers epochs a+3 .. a+k+2, i.e. e-k .. e-1 with e = a + k + 3
    num = sliding_window_view(second, k).sum(axis=1)
    den = sliding_window_view(tr[2:], k).sum(axis=1)
    num = num[: n - k - 2]
    den = den[: n - k - 2]
    vals = _nan(num.size)
    ok = den != 0
    vals[ok] = num[ok] / den[ok]
    out[k + 2:] = vals
    return out


def og_series(curve: ErrorCurve) -> np.ndarray:
    gap = np.abs(curve.train_error - curve.val_error)
    return gap - np.minimum.accumulate(gap)


# ---------------------------------------------------------------------------
# traces and outcomes
# ---------------------------------------------------------------------------

def _aligned(n: int, k: int) -> np.ndarray:
    return np.arange(1, n + 1) % k == 0


def evaluate_trace(curve: ErrorCurve, config, every_epoch: bool = False) -> IndicatorTrace:
    """Evaluate ``config`` at every epoch of ``curve``.

    Criterion values are reported wherever enough history exists. Strip-based
    rules only fire at epochs divisible by their strip length unless
    ``every_epoch`` is set.
    """
    n = len(curve)
    if isinstance(config, Gl):
        values = gl_series(curve)
        fires = values > config.alpha
    elif isinstance(config, P):
        values = p_series(curve, config.k, config.scale)
        fires = values < config.alpha
    elif isinstance(config, Pq):
        values = pq_series(curve, config.k)
        fires = values > config.alpha
    elif isinstance(config, Up):
        values = up_series(curve, config.s, config.k)
        fires = values == 1.0
    elif isinstance(config, Hnr):
        values = hnr_series(curve, config.k)
        fires = values > config.alpha
    elif isinstance(config, Og):
        values = og_series(curve)
        fires = values > config.alpha
    elif isinstance(config, Mne):
        values = np.arange(1, n + 1, dtype=np.float64)
        fires = values >= config.m
    elif isinstance(config, Oracle):
        if config.h > n:
            raise ValueError(f"oracle horizon {config.h} exceeds curve length {n}")
        values = curve.val_error.astype(np.float64)
        fires = np.zeros(n, dtype=bool)
        fires[oracle_stop(curve, config.h) - 1] = True
    else:
        from .correlate import Coi, coi_trace

        if isinstance(config, Coi):
            return coi_trace(curve, config, every_epoch=every_epoch)
        raise TypeError(f"unsupported indicator config {config!r}")

    with np.errstate(invalid="ignore"):
        fires = np.asarray(fires, dtype=bool) & ~np.isnan(values)
    if config.strip_based and not every_epoch:
        fires &= _aligned(n, config.k)
    return IndicatorTrace(config, curve, values, fires)


def stop_epoch(trace: IndicatorTrace, h: int) -> RunOutcome:
    """First firing epoch within ``1..h``, falling back to ``h`` (out of range)."""
    if not 1 <= h <= len(trace):
        raise ValueError(f"horizon {h} outside 1..{len(trace)}")
    hits = np.flatnonzero(trace.fires[:h])
    if hits.size:
        stop, out_of_range = int(hits[0]) + 1, False
    else:
        stop, out_of_range = h, True
    return RunOutcome(
        trace.config, stop, out_of_range, float(trace.curve.val_error[stop - 1])
    )


def oracle_outcome(curve: ErrorCurve, h: int) -> RunOutcome:
    stop = oracle_stop(curve, h)
    return RunOutcome(Oracle(h), stop, False, float(curve.val_error[stop - 1]))


def run_indicator(curve: ErrorCurve, config, h: int, every_epoch: bool = False) -> RunOutcome:
    if isinstance(config, Oracle):
        return oracle_outcome(curve, config.h)
    return stop_epoch(evaluate_trace(curve, config, every_epoch), h)


# ---------------------------------------------------------------------------
# textual specs: ``gl:1.0``, ``p:5:1.0``, ``up:5:5``, ``coi:5:0.7`` ...
# ---------------------------------------------------------------------------

_ARITY = {
    "gl": (Gl, (float,)),
    "p": (P, (int, float)),
    "pq": (Pq, (int, float)),
    "up": (Up, (int, int)),
    "hnr": (Hnr, (int, float)),
    "og": (Og, (float,)),
    "mne": (Mne, (int,)),
    "oracle": (Oracle, (int,)),
}


def _convert(kind, text: str, token: str):
    try:
        if kind is int:
            return int(text)
        return float(text)
    except ValueError:
        raise ValueError(f"bad parameter {text!r} in indicator spec {token!r}") from None


def parse_indicator(token: str, pool=None, coefficient: str = "pearson"):
    """Parse one indicator spec such as ``hnr:5:5.0``.

    ``p`` accepts an optional third field for the progress scale. ``coi``
    takes ``k`` and ``alpha`` plus an optional coefficient name and needs
    ``pool``.
    """
    parts = [p.strip() for p in token.strip().split(":")]
    name = parts[0].lower()
    args = parts[1:]
    if name == "coi":
        from .correlate import Coi

        if pool is None:
            raise ValueError("coi indicator needs a pool")
        if len(args) not in (2, 3):
            raise ValueError(f"coi spec needs k and alpha: {token!r}")
        coef = args[2] if len(args) == 3 else coefficient
        return Coi(
            k=_convert(int, args[0], token),
            alpha_corr=_convert(float, args[1], token),
            coefficient=coef,
            pool=tuple(pool),
        )
    if name not in _ARITY:
        raise ValueError(f"unknown indicator {name!r} in spec {token!r}")
    cls, types = _ARITY[name]
    if cls is P and len(args) == 3:
        return P(
            _convert(int, args[0], token),
            _convert(float, args[1], token),
            _convert(float, args[2], token),
        )
    if len(args) != len(types):
        raise ValueError(
            f"indicator {name!r} takes {len(types)} parameter(s), got {len(args)}: {token!r}"
        )
    return cls(*(_convert(t, a, token) for t, a in zip(types, args)))


def parse_pool(text: str) -> tuple:
    """Parse a comma-separated pool such as ``gl:1.0,p:5:1.0,og:0.5``."""
    members = tuple(parse_indicator(tok) for tok in text.split(",") if tok.strip())
    return members


def format_indicator(config) -> str:
    """Inverse of :func:`parse_indicator` for non-COI configs."""
    if isinstance(config, P) and config.scale != 100.0:
        return f"p:{config.k}:{config.alpha}:{config.scale}"
    from .correlate import Coi

    if isinstance(config, Coi):
        return f"coi:{config.k}:{config.alpha_corr}:{config.coefficient}"
    return ":".join([config.name] + [str(getattr(config, f.name)) for f in fields(config)])
