"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 a run hit ``--max-steps``
before reaching the stop fraction.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys

import numpy as np

from .analysis import DEFAULT_PROMINENCE, DEFAULT_WINDOW, feature_report
from .simulation import PRESET_NAMES, SimulationConfig, UnknownPresetError, load_config, preset, run, run_ensemble

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_STALLED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt_fraction(x: float) -> str:
    s = f"{x:.6f}".rstrip("0").rstrip(".")
    return s or "0"


def _fmt_num(x) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


def format_curve(curve, fmt: str) -> str:
    n = curve.node_count
    counts = curve.counts
    if fmt == "json":
        return json.dumps({
            "config_digest": curve.config_digest,
            "node_count": n,
            "saturated": curve.saturated,
            "counts": counts.tolist(),
        }) + "\n"
    if fmt == "gnuplot":
        lines = ["# step adopted"]
        lines += [f"{t} {int(c)}" for t, c in enumerate(counts)]
    else:
        lines = ["step,adopted,fraction"]
        lines += [f"{t},{int(c)},{_fmt_fraction(c / n)}" for t, c in enumerate(counts)]
    return "\n".join(lines) + "\n"


def format_summary(summary, fmt: str, report: dict) -> str:
    cols = summary.table()
    if fmt == "json":
        return json.dumps({
            "summary": {k: np.asarray(v).tolist() for k, v in cols.items()},
            "saturation_steps": summary.saturation_steps,
            "seeds": [str(s) for s in summary.seeds],
            "report": report,
        }) + "\n"
    names = list(cols)
    rows = zip(*(cols[k] for k in names))
    if fmt == "gnuplot":
        lines = ["# " + " ".join(names)]
        lines += [" ".join(_fmt_num(v) for v in row) for row in rows]
    else:
        lines = [",".join(names)]
        lines += [",".join(_fmt_num(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def _config_from_args(args) -> SimulationConfig:
    if args.config:
        try:
            cfg = load_config(args.config)
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"invalid config {args.config}: {exc}") from exc
    else:
        try:
            cfg = preset(args.preset)
        except UnknownPresetError as exc:
            raise UsageError(str(exc)) from exc
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["rng_seed"] = args.seed
    if args.max_steps is not None:
        changes["max_steps"] = args.max_steps
    if args.stop_fraction is not None:
        changes["stop_fraction"] = args.stop_fraction
    try:
        return cfg.replace(**changes) if changes else cfg
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    curve = run(cfg)
    with _output(args.out) as fh:
        fh.write(format_curve(curve, args.format))
    if not curve.saturated:
        print(f"warning: max_steps={cfg.max_steps} reached at {curve.final_count}/{cfg.node_count} adopted",
              file=sys.stderr)
        return EXIT_STALLED
    return EXIT_OK


def cmd_ensemble(args) -> int:
    cfg = _config_from_args(args)
    if args.runs < 1:
        raise UsageError("--runs must be >= 1")
    if args.window < 1 or args.window % 2 == 0:
        raise UsageError("--window must be a positive odd integer")
    if not 0 < args.prominence < 1:
        raise UsageError("--prominence must lie in (0, 1)")
    summary = run_ensemble(cfg, args.runs, args.seed_stream, jobs=args.jobs)
    name = args.preset if not args.config else args.config
    report = feature_report(name, summary.curves, args.window, args.prominence, cfg.stop_fraction)
    with _output(args.out) as fh:
        fh.write(format_summary(summary, args.format, report))
    if args.format != "json":
        report_path = args.report or (f"{args.out}.report.json" if args.out not in (None, "-") else None)
        text = json.dumps(report, indent=2) + "\n"
        if report_path:
            with open(report_path, "w") as fh:
                fh.write(text)
        else:
            sys.stderr.write(text)
    if not all(summary.saturated):
        return EXIT_STALLED
    return EXIT_OK


def cmd_preset_dump(args) -> int:
    try:
        cfg = preset(args.name)
    except UnknownPresetError as exc:
        raise UsageError(str(exc)) from exc
    sys.stdout.write(cfg.to_json() + "\n")
    return EXIT_OK


def _add_source(p):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", help=f"one of: {', '.join(PRESET_NAMES)}")
    src.add_argument("--config", help="JSON config file (see preset-dump)")
    p.add_argument("--format", choices=("csv", "json", "gnuplot"), default="csv")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--max-steps", type=int)
    p.add_argument("--stop-fraction", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="netdeploy", description="Simulate network technology deployment.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run one simulation and write its growth curve")
    _add_source(p)
    p.add_argument("--seed", type=int, help="rng seed (overrides the config's rng_seed)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("ensemble", help="run an ensemble and write a per-step summary plus a feature report")
    _add_source(p)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--seed-stream", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p.add_argument("--prominence", type=float, default=DEFAULT_PROMINENCE)
    p.add_argument("--report", help="feature report path (default: <out>.report.json, or stderr)")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("preset-dump", help="print a preset as an editable JSON config")
    p.add_argument("name")
    p.set_defaults(func=cmd_preset_dump)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command in ("run", "ensemble") and not (args.preset or args.config):
        parser.error("one of --preset or --config is required")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"netdeploy: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"netdeploy: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
