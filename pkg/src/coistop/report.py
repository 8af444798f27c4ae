"""Serialization of traces, frame reports, tuning sweeps and rank summaries.

Machine formats carry full float precision (``repr``); the text tables meant
for people round to two decimals. Every writer orders its rows
deterministically so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
from collections import defaultdict
from typing import Iterable, Sequence

from .indicators import IndicatorTrace
from .nemesid import FrameReport, five_number_summary, rank_key
from .tuner import TuneResult

__all__ = [
    "FRAME_COLUMNS",
    "trace_csv",
    "frame_csv",
    "read_frame_csv",
    "rerank",
    "aggregate",
    "aggregate_json",
    "rank_summary",
    "rank_csv",
    "sweep_csv",
    "tune_json",
    "frame_table",
    "rank_table",
]

FRAME_COLUMNS = ("indicator", "params", "stop_epoch", "out_of_range", "cost", "phi", "rank")


def _num(x: float) -> str:
    return repr(float(x))


def _write_rows(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def trace_csv(trace: IndicatorTrace) -> str:
    rows = []
    for e, (value, defined, fires) in enumerate(
        zip(trace.values, trace.defined, trace.fires), start=1
    ):
        rows.append([e, _num(value) if defined else "", int(defined), int(fires)])
    return _write_rows(("epoch", "value", "defined", "fires"), rows)


# ---------------------------------------------------------------------------
# frames
# ---------------------------------------------------------------------------

def frame_csv(report: FrameReport, params: dict | None = None) -> str:
    """One row for the baseline (empty rank) followed by the runs in rank order.

    ``params`` optionally maps run names to the parameter string to print;
    by default the indicator's own parameters are used.
    """
    params = params or {}
    b = report.baseline
    rows = [["oracle", b.indicator.params(), b.stop_epoch, int(b.out_of_range),
             _num(report.baseline_cost), _num(0.0), ""]]
    for s in report.scores:
        rows.append([
            s.name,
            params.get(s.name, s.outcome.indicator.params()),
            s.outcome.stop_epoch,
            int(s.out_of_range),
            _num(s.cost),
            _num(s.phi),
            s.rank,
        ])
    return _write_rows(FRAME_COLUMNS, rows)


def read_frame_csv(text: str) -> list[dict]:
    """Parse the run rows (baseline excluded) of a frame CSV."""
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != FRAME_COLUMNS:
        raise ValueError(f"not a frame CSV: header {reader.fieldnames}")
    rows = []
    for line in reader:
        if line["rank"] == "":
            continue
        rows.append({
            "indicator": line["indicator"],
            "params": line["params"],
            "stop_epoch": int(line["stop_epoch"]),
            "out_of_range": line["out_of_range"] == "1",
            "cost": float(line["cost"]),
            "phi": float(line["phi"]),
            "rank": int(line["rank"]),
        })
    return rows


def rerank(rows: Sequence[dict]) -> dict:
    """Recompute ranks from scores; returns ``{indicator: rank}``."""
    ordered = sorted(rows, key=lambda r: rank_key(r["phi"], r["out_of_range"], r["indicator"]))
    return {r["indicator"]: i for i, r in enumerate(ordered, start=1)}


def aggregate(reports: Sequence[FrameReport]) -> dict:
    """Per-frame and per-indicator statistics for box plots."""
    frames = []
    per_indicator: dict[str, list] = defaultdict(list)
    for rep in sorted(reports, key=lambda r: r.kernel_id):
        frames.append({
            "kernel_id": rep.kernel_id,
            "horizon": rep.horizon,
            "baseline_stop": rep.baseline.stop_epoch,
            "baseline_cost": rep.baseline_cost,
            "mcdb": rep.mcdb,
            "weights": list(rep.weights),
            "mean": rep.mean,
            "variance": rep.variance,
        })
        for s in rep.scores:
            per_indicator[s.name].append((s.phi, s.out_of_range))
    indicators = {}
    for name in sorted(per_indicator):
        phis = [p for p, _ in per_indicator[name]]
        in_range = [p for p, oor in per_indicator[name] if not oor]
        indicators[name] = {
            "frames": len(phis),
            "out_of_range": len(phis) - len(in_range),
            "mean": statistics.fmean(phis),
            "variance": statistics.pvariance(phis),
            "summary": five_number_summary(phis),
            "summary_in_range": five_number_summary(in_range) if in_range else None,
        }
    return {"frames": frames, "indicators": indicators}


def aggregate_json(reports: Sequence[FrameReport]) -> str:
    return json.dumps(aggregate(reports), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# ranking across frames
# ---------------------------------------------------------------------------

def rank_summary(frames: Sequence[Sequence[dict]]) -> dict:
    """Percentage of frames in which each indicator holds each rank.

    Ranks are recomputed within every frame from the scores. Out-of-range
    runs never hold a position; they are counted under ``"out_of_range"``.
    Percentages are relative to the frames containing the indicator, so
    every indicator's row sums to 100.
    """
    positions: dict[str, dict] = defaultdict(lambda: defaultdict(int))
    seen: dict[str, int] = defaultdict(int)
    width = 0
    for rows in frames:
        ranks = rerank(rows)
        for r in rows:
            name = r["indicator"]
            seen[name] += 1
            if r["out_of_range"]:
                positions[name]["out_of_range"] += 1
            else:
                positions[name][ranks[name]] += 1
                width = max(width, ranks[name])
    summary = {}
    for name in sorted(seen):
        total = seen[name]
        row = {pos: 100.0 * positions[name][pos] / total for pos in range(1, width + 1)}
        row["out_of_range"] = 100.0 * positions[name]["out_of_range"] / total
        summary[name] = {"frames": total, "percent": row}
    return summary


def rank_csv(summary: dict) -> str:
    width = max((len(v["percent"]) - 1 for v in summary.values()), default=0)
    header = ["indicator", "frames"] + [f"rank_{i}" for i in range(1, width + 1)] + ["out_of_range"]
    rows = []
    for name, entry in summary.items():
        pct = entry["percent"]
        rows.append([name, entry["frames"]]
                    + [_num(pct.get(i, 0.0)) for i in range(1, width + 1)]
                    + [_num(pct["out_of_range"])])
    return _write_rows(header, rows)


# ---------------------------------------------------------------------------
# tuning
# ---------------------------------------------------------------------------

def sweep_csv(result: TuneResult) -> str:
    rows = []
    for r in result.sweep:
        rows.append([
            r.config.label(), r.config.params(), r.outcome.stop_epoch,
            int(r.outcome.out_of_range), _num(r.outcome.val_error_at_stop),
            _num(r.cost), _num(r.deviation), _num(r.objective),
        ])
    return _write_rows(
        ("config", "params", "stop_epoch", "out_of_range", "val_error_at_stop",
         "cost", "deviation", "objective"),
        rows,
    )


def tune_json(result: TuneResult, curve_id: str) -> str:
    from .indicators import format_indicator

    doc = {
        "curve": curve_id,
        "kind": result.kind,
        "best": format_indicator(result.best),
        "label": result.best.label(),
        "params": result.best.params(),
        "stop_epoch": result.outcome.stop_epoch,
        "out_of_range": result.outcome.out_of_range,
        "val_error_at_stop": result.outcome.val_error_at_stop,
        "objective": result.objective,
        "baseline_stop": result.baseline.stop_epoch,
        "baseline_cost": result.baseline_cost,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# human-readable tables (two decimals)
# ---------------------------------------------------------------------------

def frame_table(report: FrameReport) -> str:
    lines = [f"frame {report.kernel_id}  (horizon {report.horizon}, mcdb {report.mcdb:.2f})",
             f"  {'rank':>4}  {'indicator':<24} {'s':>6}  {'phi':>6}",
             f"  {'':>4}  {'oracle':<24} {report.baseline.stop_epoch:>6}  {0.0:>6.2f}"]
    for s in report.scores:
        flag = " (out of range)" if s.out_of_range else ""
        lines.append(f"  {s.rank:>4}  {s.name:<24} {s.outcome.stop_epoch:>6}  {s.phi:>6.2f}{flag}")
    return "\n".join(lines) + "\n"


def rank_table(summary: dict) -> str:
    width = max((len(v["percent"]) - 1 for v in summary.values()), default=0)
    head = "  ".join(f"{'#' + str(i):>6}" for i in range(1, width + 1))
    lines = [f"{'indicator':<24} {head}  {'oor':>6}"]
    for name, entry in summary.items():
        pct = entry["percent"]
        cells = "  ".join(f"{pct.get(i, 0.0):>6.2f}" for i in range(1, width + 1))
        lines.append(f"{name:<24} {cells}  {pct['out_of_range']:>6.2f}")
    return "\n".join(lines) + "\n"
