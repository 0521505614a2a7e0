"""Command-line entry point.

    opinionlab <subcommand> --config PATH [--seed U64] [--out DIR] [--threads N]

Subcommands mirror the experiment kinds (simulate, meanfield, error,
chaos, stationary, concentration, tree); `validate` parses the config
and reports every violation.  Flags override the corresponding config
keys; OPINIONLAB_THREADS overrides the thread count from the
environment.  Exit codes: 0 success, 2 config error, 3 runtime/budget
error.
"""

import argparse
import sys

from .config import ConfigError, parse_config
from .gwtree import TreeBudgetError
from .harness import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, run
from .parallel import resolve_threads

COMMANDS = ("simulate", "meanfield", "error", "chaos", "stationary", "concentration",
            "tree", "validate")


def build_parser():
    parser = argparse.ArgumentParser(prog="opinionlab")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="config file (key-value text or JSON)")
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        cmd.add_argument("--out", default=None, help="override the output directory")
        cmd.add_argument("--threads", type=int, default=None, help="worker threads")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        print("config ok")
        return EXIT_OK
    cfg.kind = args.command
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = args.out
    cfg.threads = resolve_threads(args.threads if args.threads is not None else cfg.threads)
    try:
        summary = run(cfg)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except (TreeBudgetError, RuntimeError, OSError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote outputs for kind={summary['kind']} to {cfg.out}")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
