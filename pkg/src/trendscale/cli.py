"""Command-line front end: ``trendscale {resample,synth,matching,collective,similarity,all}``."""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from . import __version__
from .ingest import (
    SERIES_HEADER,
    CarryForward,
    FormatDescriptor,
    IngestError,
    PriceSeries,
    Strict,
    parse_ticks,
    read_series_csv,
    resample_with_report,
)
from .report import write_collective, write_matching, write_similarity
from .schedule import ScaleSchedule, ScheduleError, parse_schedule
from .shifts import DEFAULT_HORIZONS, InsufficientFutureError, shift_series
from .stats import (
    UndefinedStatisticError,
    align,
    build_tuple_index,
    collective_response,
    default_eps_grid,
    matching_profile,
    similarity_histogram,
    subsample,
)
from .synth import GeneratorSpec, GeneratorSpecError, generate
from .trends import InsufficientHistoryError, trend_matrix

log = logging.getLogger("trendscale")

COMMANDS = ("resample", "synth", "matching", "collective", "similarity", "all")
DEFAULT_SCALES = "recur:100"
DEFAULT_WIDTHS = {"similarity": (16,), "all": (12, 16, 20)}
MANIFEST = "manifest.json"


class UsageError(Exception):
    pass


def _int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError("values must be positive")
    return values


def _eps_grid(text: str):
    if text == "auto":
        return "auto"
    try:
        return tuple(Fraction(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad epsilon grid {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trendscale",
        description="Multi-scale trend statistics on minute bid/ask series.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in COMMANDS:
        p = sub.add_parser(name)
        src = p.add_mutually_exclusive_group()
        src.add_argument("--input", type=Path, help="tick file, or a series CSV written by this tool")
        src.add_argument("--synth", metavar="SPEC",
                         help="generator spec, e.g. 'kind=random_walk,T=100000,spread=2'")
        p.add_argument("--seed", type=int, default=None,
                       help="generator seed (overrides any seed in --synth) and subsample seed; default 42")
        p.add_argument("--out", type=Path, required=True, help="output directory")
        ingest = p.add_argument_group("tick input")
        ingest.add_argument("--columns", default="timestamp,bid,ask")
        ingest.add_argument("--delimiter", default=",")
        ingest.add_argument("--time-format", default="epoch",
                            help="'epoch' seconds or a strptime pattern (UTC)")
        ingest.add_argument("--header", action="store_true", help="skip the first line")
        ingest.add_argument("--digits", type=int, default=5, help="price decimals kept as pips")
        ingest.add_argument("--max-gap", type=int, default=120,
                            help="longest carried-forward run in minutes before splitting")
        ingest.add_argument("--strict", action="store_true", help="fail on any empty minute")
        if name in ("resample", "synth"):
            continue
        stats = p.add_argument_group("statistics")
        stats.add_argument("--scales", default=None,
                           help=f"recur:N or an explicit lag list (default {DEFAULT_SCALES})")
        stats.add_argument("--horizons", type=_int_list, default=DEFAULT_HORIZONS)
        if name in ("collective", "all"):
            stats.add_argument("--eps-grid", type=_eps_grid, default="auto")
        if name in ("similarity", "all"):
            stats.add_argument("--tuple-width", type=_int_list, default=DEFAULT_WIDTHS[name],
                               help="similarity tuple widths N (prefixes of the scale schedule)")
            stats.add_argument("--subsample", type=int, default=None, metavar="K",
                               help="uniformly subsample K aligned minutes per run")
        stats.add_argument("--dump", action="store_true",
                           help="also write per-minute trend tuples and shifts")
    return parser


@dataclass
class Run:
    """Outputs and bookkeeping accumulated while executing one command."""

    out: Path
    outputs: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def write(self, name: str, render) -> None:
        buf = io.StringIO()
        rows = render(buf)
        data = buf.getvalue().encode("utf-8")
        (self.out / name).write_bytes(data)
        self.outputs[name] = {"rows": rows, "sha256": hashlib.sha256(data).hexdigest()}


def _load_series(args, run: Run) -> tuple[PriceSeries, dict]:
    if args.synth is not None:
        spec = GeneratorSpec.parse(args.synth, seed=args.seed)
        series = generate(spec, digits=args.digits)
        return series, {"kind": "synth", "spec": spec.as_dict()}
    if args.input is None:
        raise UsageError("one of --input or --synth is required")
    if not args.input.is_file():
        raise UsageError(f"input file not found: {args.input}")
    raw = args.input.read_bytes()
    info = {"kind": "file", "path": str(args.input), "sha256": hashlib.sha256(raw).hexdigest()}
    text = raw.decode("utf-8")
    if text.split("\n", 1)[0].strip() == ",".join(SERIES_HEADER):
        info["format"] = "series"
        return read_series_csv(text, digits=args.digits), info
    fmt = FormatDescriptor(
        columns=tuple(c.strip() for c in args.columns.split(",")),
        delimiter=args.delimiter,
        timestamp_format=args.time_format,
        header=args.header,
    )
    policy = Strict() if args.strict else CarryForward(args.max_gap)
    series, discarded = resample_with_report(parse_ticks(text, fmt), policy, digits=args.digits)
    info.update(format="ticks", discarded_slots=discarded)
    if discarded:
        run.notes.append(f"gap split discarded {discarded} minutes")
    return series, info


def _schedule(args) -> ScaleSchedule:
    return parse_schedule(args.scales or DEFAULT_SCALES)


def _do_matching(args, series, run: Run) -> None:
    schedule = _schedule(args)
    try:
        matrix = trend_matrix(series, schedule)
    except InsufficientHistoryError as exc:
        run.notes.append(f"matching: {exc}")
        return
    for horizon in args.horizons:
        name = f"matching_lpr{horizon}.csv"
        try:
            profile = matching_profile(align(matrix, shift_series(series, horizon)))
        except (UndefinedStatisticError, InsufficientFutureError) as exc:
            run.notes.append(f"{name}: {exc}")
            run.write(name, lambda fh: write_matching(fh, None, schedule.lags))
            continue
        run.write(name, lambda fh: write_matching(fh, profile))


def _do_collective(args, series, run: Run) -> None:
    schedule = _schedule(args)
    grid = default_eps_grid(len(schedule)) if args.eps_grid == "auto" else args.eps_grid
    curves = []
    try:
        matrix = trend_matrix(series, schedule)
    except InsufficientHistoryError as exc:
        run.notes.append(f"collective: {exc}")
        matrix = None
    for horizon in args.horizons if matrix is not None else ():
        try:
            sample = align(matrix, shift_series(series, horizon))
        except InsufficientFutureError as exc:
            run.notes.append(f"collective l_pr={horizon}: {exc}")
            continue
        curve = collective_response(sample, grid)
        undefined = sum(v is None for v in curve.values)
        if undefined:
            run.notes.append(f"collective l_pr={horizon}: {undefined} thresholds with empty condition set")
        curves.append((horizon, curve))
    run.write("collective.csv", lambda fh: write_collective(fh, curves))


def _do_similarity(args, series, run: Run) -> None:
    schedule = parse_schedule(args.scales) if args.scales else parse_schedule(
        f"recur:{max(args.tuple_width)}"
    )
    seed = 42 if args.seed is None else args.seed
    results = []
    for n in args.tuple_width:
        if n > len(schedule):
            raise UsageError(f"tuple width {n} exceeds the {len(schedule)}-lag schedule")
        prefix = ScaleSchedule(schedule.lags[:n])
        try:
            matrix = trend_matrix(series, prefix)
        except InsufficientHistoryError as exc:
            run.notes.append(f"similarity N={n}: {exc}")
            continue
        for horizon in args.horizons:
            try:
                sample = align(matrix, shift_series(series, horizon))
            except InsufficientFutureError as exc:
                run.notes.append(f"similarity N={n} l_pr={horizon}: {exc}")
                continue
            if args.subsample is not None:
                sample = subsample(sample, args.subsample, seed)
            if len(sample) < 2:
                run.notes.append(f"similarity N={n} l_pr={horizon}: fewer than two aligned minutes")
                continue
            hist = similarity_histogram(build_tuple_index(sample))
            results.append((n, horizon, len(sample), hist))
    run.write("similarity.csv", lambda fh: write_similarity(fh, results))


def _do_dump(args, series, run: Run) -> None:
    try:
        matrix = trend_matrix(series, _schedule(args))
    except InsufficientHistoryError as exc:
        run.notes.append(f"dump: {exc}")
    else:
        run.write("trends.csv", lambda fh: (matrix.to_csv(fh), len(matrix))[1])
    for horizon in args.horizons:
        try:
            shifts = shift_series(series, horizon)
        except InsufficientFutureError as exc:
            run.notes.append(f"dump l_pr={horizon}: {exc}")
            continue
        run.write(f"shifts_lpr{horizon}.csv", lambda fh: (shifts.to_csv(fh), len(shifts))[1])


def _config(args) -> dict:
    cfg = {}
    for key, value in sorted(vars(args).items()):
        if key in ("verbose",):
            continue
        if isinstance(value, Path):
            value = str(value)
        elif isinstance(value, tuple):
            value = [str(v) if isinstance(v, Fraction) else v for v in value]
        cfg[key] = value
    return cfg


def run(args) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    job = Run(args.out)
    series, source = _load_series(args, job)
    job.write("series.csv", lambda fh: (series.to_csv(fh), len(series))[1])
    cmd = args.command
    if cmd in ("matching", "all"):
        _do_matching(args, series, job)
    if cmd in ("collective", "all"):
        _do_collective(args, series, job)
    if cmd in ("similarity", "all"):
        _do_similarity(args, series, job)
    if getattr(args, "dump", False):
        _do_dump(args, series, job)
    manifest = {
        "tool": "trendscale",
        "version": __version__,
        "command": cmd,
        "config": _config(args),
        "input": source,
        "series": {"length": len(series), "anchor_minute": series.anchor},
        "outputs": job.outputs,
        "undefined": job.notes,
        "created_utc": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    }
    (args.out / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    for note in job.notes:
        log.warning(note)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return run(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"trendscale: error: {exc}", file=sys.stderr)
        return 2
    except (IngestError, ScheduleError, GeneratorSpecError, ValueError, OSError) as exc:
        print(f"trendscale: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
