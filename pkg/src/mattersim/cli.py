"""Command-line front end.

    mattersim {coherence,farfield,kdtli,recoil-fit} --config PATH [--out DIR] [--threads N] [--seed INT]
    mattersim selftest [--out DIR] [--threads N]

Exit codes: 0 success, 2 invalid scenario, 3 numerical failure, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .errors import MatterSimError
from .parallel import resolve_workers
from .scenario import ScenarioError, parse_scenario

EXIT_OK, EXIT_SCHEMA, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

COMMANDS = {"coherence": "coherence", "farfield": "farfield", "kdtli": "kdtli", "recoil-fit": "recoil_fit"}


def _threads(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("thread count must be at least 1")
    return n


def _seed(text: str) -> int:
    n = int(text)
    if not 0 <= n < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mattersim", description="Matter-wave interferometry scenarios.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*COMMANDS, "selftest"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, required=name != "selftest",
                       help="JSON scenario file" if name != "selftest" else argparse.SUPPRESS)
        p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
        p.add_argument("--threads", type=_threads, default=None,
                       help="worker threads (default: $MATTERSIM_THREADS, else all cores)")
        p.add_argument("--seed", type=_seed, default=None, help="override the scenario seed")
    return parser


def _fail(code: int, message: str) -> int:
    print(f"mattersim: error: {message}", file=sys.stderr)
    return code


def _run_config(command: str, args) -> int:
    from .runner import run_scenario

    try:
        text = args.config.read_text()
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot read {args.config}: {exc.strerror or exc}")
    try:
        scenario = parse_scenario(text)
    except ScenarioError as exc:
        return _fail(EXIT_SCHEMA, f"{args.config}:\n{exc}")
    expected = COMMANDS[command]
    if scenario.kind != expected:
        return _fail(EXIT_SCHEMA, f"{args.config}: kind '{scenario.kind}' cannot run under '{command}'")
    if args.seed is not None:
        scenario = scenario.model_copy(update={"seed": args.seed})
    try:
        result = run_scenario(scenario, args.out, workers=args.workers, base_dir=args.config.parent)
    except ScenarioError as exc:
        return _fail(EXIT_SCHEMA, str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, f"{getattr(exc, 'filename', '') or ''} {exc.strerror or exc}".strip())
    except (MatterSimError, ArithmeticError, ValueError) as exc:
        module = type(exc).__module__.rsplit(".", 1)[-1]
        return _fail(EXIT_NUMERIC, f"{type(exc).__name__} ({module}): {exc}")
    print(result.summary)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.workers = resolve_workers(args.threads)
    except ValueError as exc:
        return _fail(EXIT_SCHEMA, f"MATTERSIM_THREADS: {exc}")
    if args.command == "selftest":
        from .selftest import run_selftest

        try:
            ok = run_selftest(args.out, workers=args.workers)
        except OSError as exc:
            return _fail(EXIT_IO, str(exc))
        return EXIT_OK if ok else EXIT_NUMERIC
    return _run_config(args.command, args)


if __name__ == "__main__":
    sys.exit(main())
