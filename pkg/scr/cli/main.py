"""
Ponto de entrada da linha de comando do dimlab.

    dimlab run --config cfg.json [--out DIR] [--seed N] [--verbose]
    dimlab describe <example>
"""

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from loguru import logger

from scr.cli.commands import EXIT_ERROR, EXIT_OK, ConfigError, describe, load_config, run
from scr.core.errors import DimlabError

LOG_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}"
DEFAULT_OUT = "dimlab_out"


def configure_logging(verbose: bool = False, log_file: Optional[Path] = None) -> None:
    """stderr em INFO (DEBUG com --verbose) e, opcionalmente, arquivo da execução."""
    level = "DEBUG" if verbose else "INFO"
    logger.remove()
    logger.add(sys.stderr, level=level, format=LOG_FORMAT)
    if log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        logger.add(log_file, level=level, format=LOG_FORMAT, mode="w", encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dimlab",
        description="Numerical fractal dimensions, interpolation spectra and projection profiles",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="run the tasks of a JSON config")
    run_parser.add_argument("--config", required=True, type=Path, help="run configuration (JSON)")
    run_parser.add_argument("--out", type=Path, default=None, help="output directory")
    run_parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    run_parser.add_argument("--verbose", action="store_true", help="debug logging")

    describe_parser = sub.add_parser("describe", help="print reference formulas of a canonical example")
    describe_parser.add_argument("example", help="example id, e.g. seq_times_segment or f_p(1)")
    describe_parser.add_argument("--p", type=float, default=None, help="exponent p for f_p examples")
    return parser


def _run_command(args: argparse.Namespace) -> int:
    configure_logging(args.verbose)
    try:
        config = load_config(args.config, seed=args.seed, out_dir=args.out)
    except ConfigError as e:
        logger.error(str(e))
        return EXIT_ERROR
    out_dir = Path(config.output_dir or DEFAULT_OUT)
    configure_logging(args.verbose, out_dir / "run.log")
    try:
        return run(config, out_dir).exit_code
    except Exception as e:
        logger.exception(f"Unhandled error: {e}")
        return EXIT_ERROR


def _describe_command(args: argparse.Namespace) -> int:
    configure_logging(False)
    try:
        print(describe(args.example, args.p))
    except DimlabError as e:
        logger.error(str(e))
        return EXIT_ERROR
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _run_command(args)
    return _describe_command(args)


if __name__ == "__main__":
    sys.exit(main())
