"""Command-line entry point.

Usage:
    airsched --spec experiment.toml [--seed N] [--out DIR]
             [--threads N] [--variant NAME ...] [--plot]

Exit codes: 0 on success, 1 on a spec or validation problem, 2 on an
I/O failure (unreadable spec file, unwritable output directory).
The thread count falls back to the AIRSCHED_THREADS environment
variable, then to 1.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .experiments import (
    ExperimentSpec,
    SpecError,
    emit_csv,
    emit_plot,
    emit_trace_csv,
    run_experiment,
)

EXIT_OK = 0
EXIT_SPEC = 1
EXIT_IO = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="airsched",
        description="Run a device-scheduling experiment described by a TOML spec.",
    )
    parser.add_argument("--spec", required=True, type=Path,
                        help="path to the experiment spec (TOML)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the spec's master seed")
    parser.add_argument("--out", type=Path, default=Path("results"),
                        help="output directory (default: ./results)")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker processes (default: AIRSCHED_THREADS or 1)")
    parser.add_argument("--variant", action="append", default=None,
                        metavar="NAME",
                        help="restrict to this variant; repeatable")
    parser.add_argument("--plot", action="store_true",
                        help="also write a summary figure")
    return parser


def _resolve_threads(arg) -> int:
    if arg is not None:
        return int(arg)
    env = os.environ.get("AIRSCHED_THREADS", "").strip()
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise SpecError([("threads", f"AIRSCHED_THREADS is not an integer: {env!r}")]) from exc
    return 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    try:
        raw = args.spec.read_bytes()
    except OSError as exc:
        print(f"error: cannot read spec file: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        mapping = tomllib.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, tomllib.TOMLDecodeError) as exc:
        print(f"error: malformed spec file: {exc}", file=sys.stderr)
        return EXIT_SPEC

    try:
        spec = ExperimentSpec.from_mapping(mapping)
        if args.seed is not None:
            spec = replace(spec, seed=args.seed)
        if args.variant:
            spec = replace(spec, variants=tuple(args.variant))
        spec.validate()
        threads = _resolve_threads(args.threads)
        if threads < 1:
            raise SpecError([("threads", "must be at least 1")])
    except SpecError as exc:
        print(f"error: invalid spec ({', '.join(exc.fields)}): {exc}", file=sys.stderr)
        return EXIT_SPEC

    result = run_experiment(spec, threads=threads)

    try:
        csv_path = emit_csv(result, args.out / f"{spec.label}.csv")
        print(f"wrote {csv_path} ({len(result.rows)} rows)")
        trace_path = emit_trace_csv(result, args.out / f"{spec.label}_trace.csv")
        if trace_path is not None:
            print(f"wrote {trace_path} ({len(result.trace_rows)} trace rows)")
    except OSError as exc:
        print(f"error: cannot write results: {exc}", file=sys.stderr)
        return EXIT_IO

    if args.plot:
        plot_path = emit_plot(result, args.out / f"{spec.label}.png")
        if plot_path is not None:
            print(f"wrote {plot_path}")
        else:
            print("warning: plotting unavailable, skipped", file=sys.stderr)

    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
