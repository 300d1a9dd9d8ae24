"""Command-line entry point: ``cvlab run | bench | selftest``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigInvalid, LabError, PolicyDenied

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PROTOCOL = 3
EXIT_POLICY = 4

_OUTCOME_CODES = {"success": EXIT_OK, "protocol_failure": EXIT_PROTOCOL, "policy_blocked": EXIT_POLICY}


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_run(args: argparse.Namespace) -> int:
    from .config import load_config, run_config

    try:
        cfg = load_config(args.config)
    except FileNotFoundError:
        print(f"config error: {args.config}: no such file", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    try:
        report = run_config(cfg)
    except PolicyDenied as exc:
        print(f"blocked: {exc}", file=sys.stderr)
        return EXIT_POLICY
    except LabError as exc:
        print(f"protocol failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    _emit(report.to_json(), args.out)
    return _OUTCOME_CODES[report.outcome]


def cmd_bench(args: argparse.Namespace) -> int:
    from .bench import bench_report, run_bench

    report = bench_report(run_bench(seed=args.seed or 0))
    _emit(report.to_json(), args.out)
    return _OUTCOME_CODES[report.outcome]


def cmd_selftest(args: argparse.Namespace) -> int:
    from .selftest import run_selftest

    results = run_selftest()
    for r in results:
        line = f"{'PASS' if r.passed else 'FAIL'} {r.name}"
        print(f"{line}  ({r.detail})" if r.detail else line)
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_PROTOCOL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvlab", description="Deterministic cryptovirology simulation lab.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario from a JSON config")
    run.add_argument("--config", required=True, help="scenario config file")
    run.add_argument("--out", help="report path (default: stdout)")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.set_defaults(func=cmd_run)

    bench = sub.add_parser("bench", help="relative-performance benchmarks")
    bench.add_argument("--out", help="report path (default: stdout)")
    bench.add_argument("--seed", type=int, help="seed for benchmark inputs")
    bench.set_defaults(func=cmd_bench)

    selftest = sub.add_parser("selftest", help="run the built-in invariant checks")
    selftest.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
