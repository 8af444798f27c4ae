"""Command-line interface.

    coistop ingest curves/*.csv
    coistop eval run.csv --indicator gl:2.0 --indicator coi:5:0.7 --pool gl:1.0,og:0.5
    coistop frame curves/ --horizon 1000 --out frames/
    coistop tune run.csv --indicator hnr --out tuned/
    coistop rank frames/ --out frames/
    coistop synth --n 1000 --onset 300 --ramp 0.05 --noise-amp 0.5 --seed 7 --out run.csv

Exit status is 0 on success, 1 on bad input and 2 when an internal
invariant is violated.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .correlate import COEFFICIENTS
from .curves import CurveFormatError, ErrorCurve, dump_curve, load_curve
from .indicators import (
    evaluate_trace, oracle_outcome, parse_indicator, parse_pool, run_indicator,
)
from .nemesid import Frame, frame_report
from .report import (
    aggregate_json, frame_csv, frame_table, rank_csv, rank_summary, rank_table,
    read_frame_csv, sweep_csv, trace_csv, tune_json,
)
from .synth import CurveModel, generate
from .tuner import KINDS, STRIP, tune

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2

POOL_KINDS = ("gl", "p", "pq", "up", "hnr", "og")


class InvariantError(RuntimeError):
    pass


def _invariant(cond: bool, message: str) -> None:
    if not cond:
        raise InvariantError(message)


@dataclass
class HarnessConfig:
    curves: list
    horizon: int = 1000
    weights: tuple = (0.5, 0.5)
    indicators: list = field(default_factory=lambda: list(KINDS))
    pool: Optional[str] = None
    coefficient: str = "pearson"
    strip_k: int = STRIP
    every_epoch: bool = False
    out: Optional[str] = None
    jobs: int = 1


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _format_of(path: Path, declared: Optional[str]) -> str:
    if declared:
        return declared
    return "jsonl" if path.suffix.lower() in (".jsonl", ".json", ".ndjson") else "csv"


def _expand(paths, suffixes=(".csv", ".jsonl")) -> list[Path]:
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(q for q in p.iterdir() if q.suffix.lower() in suffixes))
        else:
            out.append(p)
    return out


def _read_curve(path: Path, fmt: Optional[str]) -> ErrorCurve:
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CurveFormatError(f"cannot read {path}: {exc.strerror}") from None
    return load_curve(data, _format_of(path, fmt), curve_id=path.stem)


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _pool_from(text: Optional[str]):
    return parse_pool(text) if text else None


def _is_tuned(token: str) -> bool:
    parts = token.strip().lower().split(":")
    return len(parts) == 1 or (len(parts) == 2 and parts[1] == "tuned")


def _family(token: str) -> str:
    return token.strip().lower().split(":")[0]


def _run_name(token: str) -> str:
    token = token.strip().lower()
    return _family(token) if _is_tuned(token) else token


# ---------------------------------------------------------------------------
# frame evaluation (runs in worker processes when --jobs > 1)
# ---------------------------------------------------------------------------

def resolve_frame(curve: ErrorCurve, cfg: HarnessConfig):
    """Turn indicator tokens into concrete configs for ``curve``.

    Bare family names (or ``name:tuned``) are tuned on the curve. Without an
    explicit ``--pool``, COI draws on the tuned settings of the other
    families.
    """
    w_mi, w_ea = cfg.weights
    tuned: dict[str, object] = {}

    def best(kind: str, pool=None):
        if kind not in tuned:
            tuned[kind] = tune(curve, kind, cfg.horizon, w_mi, w_ea, pool=pool,
                               coefficient=cfg.coefficient, every_epoch=cfg.every_epoch,
                               k=cfg.strip_k).best
        return tuned[kind]

    def pool():
        explicit = _pool_from(cfg.pool)
        if explicit is not None:
            return explicit
        members = []
        for kind in POOL_KINDS:
            member = best(kind)
            if member not in members:
                members.append(member)
        return tuple(members)

    names, configs = [], []
    for token in cfg.indicators:
        name = _run_name(token)
        family = _family(token)
        if family not in KINDS:
            raise ValueError(f"unknown indicator {family!r}")
        if _is_tuned(token):
            config = best(family, pool() if family == "coi" else None)
        elif family == "coi":
            config = parse_indicator(token, pool=pool(), coefficient=cfg.coefficient)
        else:
            config = parse_indicator(token)
        names.append(name)
        configs.append(config)
    return names, configs


def evaluate_frame(curve: ErrorCurve, cfg: HarnessConfig):
    if len(curve) < cfg.horizon:
        raise ValueError(f"curve {curve.id!r} has {len(curve)} epochs, horizon is {cfg.horizon}")
    names, configs = resolve_frame(curve, cfg)
    runs = [run_indicator(curve, c, cfg.horizon, cfg.every_epoch) for c in configs]
    frame = Frame(curve.id, curve, cfg.horizon, oracle_outcome(curve, cfg.horizon), runs, names)
    report = frame_report(frame, *cfg.weights)
    for s in report.scores:
        _invariant(-1.0 <= s.phi <= 1.0, f"phi {s.phi} outside [-1, 1] in frame {curve.id}")
    return report


def _frame_job(args):
    path, fmt, cfg = args
    try:
        curve = _read_curve(Path(path), fmt)
        report = evaluate_frame(curve, cfg)
    except (CurveFormatError, ValueError) as exc:
        return Path(path).stem, None, f"{path}: {exc}"
    return curve.id, report, None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_ingest(args) -> int:
    paths = _expand(args.curves)
    if not paths:
        print("no curve files given", file=sys.stderr)
        return EXIT_INPUT
    status = EXIT_OK
    for path in paths:
        try:
            curve = _read_curve(path, args.format)
        except CurveFormatError as exc:
            print(f"{path}: error: {exc}")
            status = EXIT_INPUT
        else:
            print(f"{path}: ok ({len(curve)} epochs)")
    return status


def cmd_eval(args) -> int:
    curve = _read_curve(Path(args.curve), args.format)
    pool = _pool_from(args.pool)
    if not args.indicator:
        raise ValueError("eval needs at least one --indicator")
    outputs = []
    for token in args.indicator:
        if _is_tuned(token):
            raise ValueError(f"eval needs explicit parameters, got {token!r}")
        if _family(token) == "coi" and pool is None:
            raise ValueError("coi needs --pool")
        config = parse_indicator(token, pool=pool, coefficient=args.coef)
        trace = evaluate_trace(curve, config, args.every_epoch)
        outputs.append((token.replace(":", "_"), trace))
    if args.out:
        out = Path(args.out)
        for name, trace in outputs:
            _write_atomic(out / f"{curve.id}__{name}.csv", trace_csv(trace))
    else:
        for i, (name, trace) in enumerate(outputs):
            if len(outputs) > 1:
                print(f"# {name}")
            sys.stdout.write(trace_csv(trace))
    return EXIT_OK


def _harness(args) -> HarnessConfig:
    return HarnessConfig(
        curves=[str(p) for p in _expand(args.curves)],
        horizon=args.horizon,
        weights=(args.w_mi, args.w_ea),
        indicators=args.indicator or list(KINDS),
        pool=args.pool,
        coefficient=args.coef,
        strip_k=args.strip_k,
        every_epoch=args.every_epoch,
        out=args.out,
        jobs=args.jobs,
    )


def run_frames(cfg: HarnessConfig, fmt: Optional[str] = None):
    """Evaluate every curve's frame; returns ``(reports, errors)`` ordered by id."""
    jobs = [(p, fmt, cfg) for p in cfg.curves]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_frame_job, jobs))
    else:
        results = [_frame_job(j) for j in jobs]
    ids = [r[0] for r in results]
    if len(set(ids)) != len(ids):
        raise ValueError("curve file names must be unique (they name the frames)")
    results.sort(key=lambda r: r[0])
    reports = [r[1] for r in results if r[1] is not None]
    errors = [r[2] for r in results if r[2] is not None]
    return reports, errors


def cmd_frame(args) -> int:
    cfg = _harness(args)
    if not cfg.curves:
        raise ValueError("no curve files given")
    reports, errors = run_frames(cfg, args.format)
    for err in errors:
        print(f"error: {err}", file=sys.stderr)
    for rep in reports:
        if cfg.out:
            _write_atomic(Path(cfg.out) / f"{rep.kernel_id}.csv", frame_csv(rep))
        sys.stdout.write(frame_table(rep))
    if cfg.out and reports:
        _write_atomic(Path(cfg.out) / "aggregate.json", aggregate_json(reports))
    return EXIT_INPUT if errors else EXIT_OK


def cmd_tune(args) -> int:
    curve = _read_curve(Path(args.curve), args.format)
    kinds = args.indicator or list(KINDS)
    pool = _pool_from(args.pool)
    for kind in kinds:
        kind = kind.strip().lower()
        if kind == "coi" and pool is None:
            raise ValueError("tuning coi needs --pool")
        result = tune(curve, kind, args.horizon, args.w_mi, args.w_ea, pool=pool,
                      coefficient=args.coef, every_epoch=args.every_epoch, k=args.strip_k)
        doc = tune_json(result, curve.id)
        if args.out:
            out = Path(args.out)
            _write_atomic(out / f"{curve.id}__{kind}_sweep.csv", sweep_csv(result))
            _write_atomic(out / f"{curve.id}__{kind}_best.json", doc)
        sys.stdout.write(doc)
    return EXIT_OK


def load_frame_rows(paths) -> list:
    """Frame CSV rows from files and directories.

    Explicit files must be frame CSVs; other CSVs found in directories (such
    as ``rank.csv``) are skipped.
    """
    frames = []
    for p in map(Path, paths):
        if p.is_dir():
            for q in sorted(q for q in p.iterdir() if q.suffix.lower() == ".csv"):
                try:
                    frames.append(read_frame_csv(q.read_text(encoding="utf-8")))
                except ValueError:
                    continue
        else:
            try:
                frames.append(read_frame_csv(p.read_text(encoding="utf-8")))
            except ValueError as exc:
                raise ValueError(f"{p}: {exc}") from None
    return frames


def cmd_rank(args) -> int:
    frames = load_frame_rows(args.frames)
    if not frames:
        raise ValueError("no frame reports found")
    summary = rank_summary(frames)
    for entry in summary.values():
        _invariant(abs(sum(entry["percent"].values()) - 100.0) < 1e-9,
                   "rank percentages do not sum to 100")
    if args.out:
        _write_atomic(Path(args.out) / "rank.csv", rank_csv(summary))
    sys.stdout.write(rank_table(summary))
    return EXIT_OK


def cmd_synth(args) -> int:
    model = CurveModel(
        n=args.n, train_floor=args.train_floor, train_init=args.train_init,
        train_rate=args.train_rate, val_floor=args.val_floor, val_init=args.val_init,
        val_rate=args.val_rate, onset=args.onset if args.onset is not None else args.n,
        ramp=args.ramp, noise_amp=args.noise_amp, seed=args.seed,
    )
    if args.count < 1:
        raise ValueError("--count must be positive")
    for i in range(args.count):
        m = CurveModel(**{**model.__dict__, "seed": model.seed + i})
        if args.count == 1:
            name = args.name or f"synth-{m.seed}"
        else:
            name = f"{args.name or 'synth'}-{m.seed}"
        text = dump_curve(generate(m, name), args.format)
        if not args.out:
            sys.stdout.write(text)
            continue
        out = Path(args.out)
        if args.count > 1 or out.is_dir():
            out = out / f"{name}.{args.format}"
        _write_atomic(out, text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, horizon: bool = True) -> None:
    p.add_argument("--format", choices=("csv", "jsonl"), default=None,
                   help="curve file format (default: from the file extension)")
    p.add_argument("--pool", default=None, help="COI pool, e.g. gl:1.0,p:5:1.0,og:0.5")
    p.add_argument("--coef", choices=COEFFICIENTS, default="pearson")
    p.add_argument("--strip-k", type=int, default=STRIP, help="strip length for tuning grids")
    p.add_argument("--every-epoch", action="store_true",
                   help="let strip-based indicators fire at every epoch")
    p.add_argument("--out", default=None, help="output directory")
    if horizon:
        p.add_argument("--horizon", type=int, default=1000)
        p.add_argument("--w-mi", type=float, default=0.5)
        p.add_argument("--w-ea", type=float, default=0.5)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coistop", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate curve files")
    p.add_argument("curves", nargs="+")
    p.add_argument("--format", choices=("csv", "jsonl"), default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("eval", help="write per-epoch traces of indicators")
    p.add_argument("curve")
    p.add_argument("--indicator", action="append", default=[])
    _common(p, horizon=False)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("frame", help="score indicators against the oracle on each curve")
    p.add_argument("curves", nargs="+")
    p.add_argument("--indicator", action="append", default=[],
                   help="indicator spec, or a bare family name to tune it (repeatable)")
    p.add_argument("--jobs", type=int, default=1)
    _common(p)
    p.set_defaults(func=cmd_frame)

    p = sub.add_parser("tune", help="sweep tuning grids on one curve")
    p.add_argument("curve")
    p.add_argument("--indicator", action="append", default=[], help="family to tune")
    _common(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("rank", help="rank-position percentages across frame reports")
    p.add_argument("frames", nargs="+", help="frame CSV files or directories")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("synth", help="generate a synthetic error curve")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--train-floor", type=float, default=5.0)
    p.add_argument("--train-init", type=float, default=60.0)
    p.add_argument("--train-rate", type=float, default=0.05)
    p.add_argument("--val-floor", type=float, default=10.0)
    p.add_argument("--val-init", type=float, default=65.0)
    p.add_argument("--val-rate", type=float, default=0.05)
    p.add_argument("--onset", type=int, default=None, help="overfitting onset (default: n)")
    p.add_argument("--ramp", type=float, default=0.0)
    p.add_argument("--noise-amp", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1, help="curves to write, seeds seed..seed+count-1")
    p.add_argument("--name", default=None)
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--out", default=None, help="output file, or directory when --count > 1")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (CurveFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
