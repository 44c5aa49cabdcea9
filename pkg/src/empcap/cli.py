"""Command line entry point: ``run``, ``lemmas`` and ``inspect``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import (ConfigError, format_summary, inspect_block_log, parse_config,
                      run_experiment)
from .lemmas import lemma_suite

_OVERRIDES = ("n", "seed", "channel", "trials", "variant", "sync", "arith", "out")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="empcap", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte-Carlo experiment")
    run.add_argument("--config", help="key=value config file")
    run.add_argument("--n")
    run.add_argument("--seed")
    run.add_argument("--channel")
    run.add_argument("--trials")
    run.add_argument("--variant", choices=["finite_horizon", "horizon_free"])
    run.add_argument("--sync", choices=["free", "charged"])
    run.add_argument("--arith", choices=["fast", "exact"])
    run.add_argument("--out")
    run.add_argument("--verbose", action="store_true", help="also write the per-block log")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="any other config key")

    lem = sub.add_parser("lemmas", help="run the lemma property suites")
    lem.add_argument("--quick", action="store_true", help="fewer random instances")

    ins = sub.add_parser("inspect", help="pretty-print a per-block log")
    ins.add_argument("path")
    ins.add_argument("--seed", type=int)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "lemmas":
        report = lemma_suite(quick=args.quick)
        print(report.text())
        return 0 if report.passed else 1
    if args.command == "inspect":
        print(inspect_block_log(Path(args.path).read_text(), args.seed))
        return 0

    overrides = {k: getattr(args, k) for k in _OVERRIDES if getattr(args, k) is not None}
    if args.verbose:
        overrides["verbose"] = "true"
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            print(f"error: --set expects KEY=VALUE, got {item!r}", file=sys.stderr)
            return 2
        overrides[key.strip()] = value
    try:
        text = Path(args.config).read_text() if args.config else ""
        config = parse_config(text, overrides)
        records, summary = run_experiment(config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(format_summary(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
