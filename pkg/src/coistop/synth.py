"""Deterministic synthetic learning curves with a known overfitting onset.

Training error decays exponentially towards a floor. Validation error does
the same, plus a linear ramp of slope ``ramp`` starting at ``onset``. Noise
comes from SplitMix64 so any implementation of the same recurrence produces
identical curves for the same seed:

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z = z ^ (z >> 31)                      (all arithmetic mod 2**64)

A draw maps ``z`` to ``u = (z >> 11) * 2**-53`` in ``[0, 1)`` and to noise
``noise_amp * (2u - 1)``. Each epoch consumes one draw for training error,
then one for validation error. Values are clamped at 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import ErrorCurve

__all__ = ["SplitMix64", "CurveModel", "generate", "noiseless_val"]

_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0 ** -53


@dataclass(frozen=True)
class CurveModel:
    n: int
    train_floor: float = 5.0
    train_init: float = 60.0
    train_rate: float = 0.05
    val_floor: float = 10.0
    val_init: float = 65.0
    val_rate: float = 0.05
    onset: int = 1
    ramp: float = 0.0
    noise_amp: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not isinstance(self.onset, int) or not 1 <= self.onset <= self.n:
            raise ValueError(f"onset must lie in 1..{self.n}, got {self.onset!r}")
        for name in ("train_floor", "train_init", "val_floor", "val_init",
                     "train_rate", "val_rate", "ramp", "noise_amp"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
        if self.train_rate <= 0 or self.val_rate <= 0:
            raise ValueError("decay rates must be positive")
        if self.ramp < 0 or self.noise_amp < 0:
            raise ValueError("ramp and noise_amp must be non-negative")
        if min(self.train_floor, self.train_init, self.val_floor, self.val_init) < 0:
            raise ValueError("floors and initial errors must be non-negative")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


def noiseless_val(model: CurveModel, e: float) -> float:
    """Validation error at (possibly fractional) epoch ``e`` without noise."""
    decay = model.val_floor + (model.val_init - model.val_floor) * math.exp(-model.val_rate * e)
    return decay + model.ramp * max(0.0, e - model.onset)


def generate(model: CurveModel, curve_id: str | None = None) -> ErrorCurve:
    rng = SplitMix64(model.seed)
    train = np.empty(model.n)
    val = np.empty(model.n)
    for i in range(model.n):
        e = i + 1
        tr_noise = model.noise_amp * (2.0 * rng.uniform() - 1.0)
        va_noise = model.noise_amp * (2.0 * rng.uniform() - 1.0)
        tr = (model.train_floor
              + (model.train_init - model.train_floor) * math.exp(-model.train_rate * e))
        train[i] = max(0.0, tr + tr_noise)
        val[i] = max(0.0, noiseless_val(model, e) + va_noise)
    return ErrorCurve(curve_id or f"synth-{model.seed}", train, val)
