"""Epoch-indexed error curves: data model, ingestion and accuracy transforms.

Epochs are 1-based everywhere in the public interface. Internally the
series are stored as 0-based read-only numpy arrays, so ``train_error[e - 1]``
is the training error at epoch ``e``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Union

import numpy as np

__all__ = [
    "CurveFormatError",
    "ErrorCurve",
    "HeadSets",
    "load_curve",
    "dump_curve",
    "error_from_accuracy",
    "head_accuracy",
]

Source = Union[bytes, str, IO[bytes], IO[str]]


class CurveFormatError(ValueError):
    """Raised when a curve file cannot be ingested.

    ``row`` is the 1-based physical row (CSV line or JSONL line) at fault,
    or ``None`` when the problem concerns the file as a whole.
    """

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


def _frozen_array(values: Iterable[float], name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ErrorCurve:
    """Training and validation error series for one kernel.

    Values are percentages when derived from accuracy; generic loss values
    above 100 are accepted.
    """

    id: str
    train_error: np.ndarray
    val_error: np.ndarray

    def __post_init__(self):
        tr = _frozen_array(self.train_error, "train_error")
        va = _frozen_array(self.val_error, "val_error")
        if tr.size == 0:
            raise ValueError("curve must contain at least one epoch")
        if tr.shape != va.shape:
            raise ValueError(
                f"train_error and val_error differ in length ({tr.size} != {va.size})"
            )
        for name, arr in (("train_error", tr), ("val_error", va)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
            if np.any(arr < 0):
                raise ValueError(f"{name} contains negative values")
        object.__setattr__(self, "train_error", tr)
        object.__setattr__(self, "val_error", va)

    def __len__(self) -> int:
        return int(self.train_error.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ErrorCurve):
            return NotImplemented
        return (
            self.id == other.id
            and np.array_equal(self.train_error, other.train_error)
            and np.array_equal(self.val_error, other.val_error)
        )

    def __hash__(self) -> int:
        return hash((self.id, self.train_error.tobytes(), self.val_error.tobytes()))

    @property
    def epochs(self) -> np.ndarray:
        return np.arange(1, len(self) + 1)

    def truncate(self, horizon: int) -> "ErrorCurve":
        """Return the first ``horizon`` epochs of the curve."""
        if not 1 <= horizon <= len(self):
            raise ValueError(f"horizon {horizon} outside 1..{len(self)}")
        return ErrorCurve(self.id, self.train_error[:horizon], self.val_error[:horizon])


@dataclass(frozen=True)
class HeadSets:
    """Gold and predicted dependency heads for one evaluation set."""

    gold: frozenset = field(default_factory=frozenset)
    predicted: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "gold", frozenset(self.gold))
        object.__setattr__(self, "predicted", frozenset(self.predicted))


def error_from_accuracy(accuracy: float) -> float:
    """Error percentage as the complement of an accuracy percentage."""
    if not (0.0 <= accuracy <= 100.0):
        raise ValueError(f"accuracy must lie in [0, 100], got {accuracy}")
    return 100.0 - accuracy


def head_accuracy(heads: HeadSets) -> float:
    """Percentage of gold heads recovered by the prediction."""
    if not heads.gold:
        raise ValueError("gold head set is empty")
    return 100.0 * len(heads.predicted & heads.gold) / len(heads.gold)


# ---------------------------------------------------------------------------
# ingestion
# ---------------------------------------------------------------------------

def _read_text(source: Source) -> str:
    if isinstance(source, bytes):
        data = source
    elif isinstance(source, str):
        return source
    else:
        data = source.read()
        if isinstance(data, str):
            return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CurveFormatError(f"not valid UTF-8: {exc}") from None


def _number(text, row: int, column: str) -> float:
    if isinstance(text, bool):
        raise CurveFormatError(f"{column} is not numeric: {text!r}", row)
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise CurveFormatError(f"{column} is not numeric: {text!r}", row) from None
    if not math.isfinite(value):
        raise CurveFormatError(f"{column} is not finite: {text!r}", row)
    if value < 0:
        raise CurveFormatError(f"{column} is negative: {value}", row)
    return value


def _epoch(text, row: int) -> int:
    if isinstance(text, bool):
        raise CurveFormatError(f"epoch is not an integer: {text!r}", row)
    if isinstance(text, int):
        return text
    if isinstance(text, float):
        if text.is_integer():
            return int(text)
        raise CurveFormatError(f"epoch is not an integer: {text!r}", row)
    try:
        return int(str(text).strip())
    except ValueError:
        raise CurveFormatError(f"epoch is not an integer: {text!r}", row) from None


def _parse_csv(text: str) -> list[tuple[int, int, float, float]]:
    records = []
    for lineno, fields in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not fields or all(not f.strip() for f in fields):
            continue
        if not records and lineno == 1 and fields[0].strip().lower() == "epoch":
            header = [f.strip().lower() for f in fields]
            if header != ["epoch", "train_error", "val_error"]:
                raise CurveFormatError(f"unexpected header {fields}", lineno)
            continue
        if len(fields) != 3:
            raise CurveFormatError(f"expected 3 columns, found {len(fields)}", lineno)
        epoch = _epoch(fields[0], lineno)
        train = _number(fields[1].strip(), lineno, "train_error")
        val = _number(fields[2].strip(), lineno, "val_error")
        records.append((lineno, epoch, train, val))
    return records


def _parse_jsonl(text: str) -> list[tuple[int, int, float, float]]:
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CurveFormatError(f"malformed JSON: {exc.msg}", lineno) from None
        if not isinstance(obj, dict):
            raise CurveFormatError("record is not a JSON object", lineno)
        missing = [k for k in ("epoch", "train_error", "val_error") if k not in obj]
        if missing:
            raise CurveFormatError(f"missing keys {missing}", lineno)
        if not isinstance(obj["epoch"], int) or isinstance(obj["epoch"], bool):
            raise CurveFormatError(f"epoch is not an integer: {obj['epoch']!r}", lineno)
        for key in ("train_error", "val_error"):
            if not isinstance(obj[key], (int, float)) or isinstance(obj[key], bool):
                raise CurveFormatError(f"{key} is not numeric: {obj[key]!r}", lineno)
        records.append(
            (
                lineno,
                obj["epoch"],
                _number(obj["train_error"], lineno, "train_error"),
                _number(obj["val_error"], lineno, "val_error"),
            )
        )
    return records


def load_curve(source: Source, format: str = "csv", curve_id: str = "curve") -> ErrorCurve:
    """Parse and validate one error curve.

    ``source`` may be raw bytes, text, or an open (binary or text) file.
    Rows may appear in any order, but the epochs must be exactly ``1..n``.
    """
    if format not in ("csv", "jsonl"):
        raise ValueError(f"unknown curve format {format!r}")
    text = _read_text(source)
    records = _parse_csv(text) if format == "csv" else _parse_jsonl(text)
    if not records:
        raise CurveFormatError("no data rows")

    seen: dict[int, int] = {}
    for lineno, epoch, _, _ in records:
        if epoch < 1:
            raise CurveFormatError(f"epoch {epoch} is not positive", lineno)
        if epoch in seen:
            raise CurveFormatError(
                f"duplicate epoch {epoch} (first seen at row {seen[epoch]})", lineno
            )
        seen[epoch] = lineno
    records.sort(key=lambda r: r[1])
    for expected, (lineno, epoch, _, _) in enumerate(records, start=1):
        if epoch != expected:
            raise CurveFormatError(f"missing epoch {expected} (next epoch is {epoch})", lineno)

    return ErrorCurve(
        curve_id,
        [r[2] for r in records],
        [r[3] for r in records],
    )


def dump_curve(curve: ErrorCurve, format: str = "csv") -> str:
    """Serialize a curve in the format read by :func:`load_curve`."""
    lines = []
    if format == "csv":
        lines.append("epoch,train_error,val_error")
        for e, (tr, va) in enumerate(zip(curve.train_error, curve.val_error), start=1):
            lines.append(f"{e},{float(tr)!r},{float(va)!r}")
    elif format == "jsonl":
        for e, (tr, va) in enumerate(zip(curve.train_error, curve.val_error), start=1):
            lines.append(
                json.dumps({"epoch": e, "train_error": float(tr), "val_error": float(va)})
            )
    else:
        raise ValueError(f"unknown curve format {format!r}")
    return "\n".join(lines) + "\n"
