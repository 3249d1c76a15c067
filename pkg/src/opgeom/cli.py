"""Command line entry point: ``opgeom verify`` and ``opgeom preset``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import PRESETS, SUITES, ConfigError, emit_report, exit_code, load_config, run_suites, write_preset

EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opgeom", description="Verify geometric identities of first-order 2x2 operators.")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run verification suites on a config file")
    verify.add_argument("config", help="path to a JSON config")
    verify.add_argument("--suite", action="append", choices=SUITES, metavar="NAME", help="suite to run (repeatable)")
    verify.add_argument("--format", choices=("text", "json"), default="text")
    verify.add_argument("--seed", type=int, help="override the config seed")
    verify.add_argument("--samples", type=int, help="override the number of sampled points")
    verify.add_argument("--out", help="write the report here instead of stdout")

    preset = sub.add_parser("preset", help="write a catalog config")
    preset.add_argument("name", choices=PRESETS)
    preset.add_argument("--out", required=True, help="destination JSON path")
    return parser


def _verify(args) -> int:
    if args.seed is not None and args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return EXIT_CONFIG
    if args.samples is not None and args.samples < 1:
        print("error: --samples must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = load_config(args.config, seed=args.seed, samples=args.samples)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    reports = run_suites(config, args.suite)
    document = emit_report(reports, args.format, config)
    if args.out:
        Path(args.out).write_text(document)
    else:
        sys.stdout.write(document)
    return exit_code(reports)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return _verify(args)
    try:
        write_preset(args.name, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
