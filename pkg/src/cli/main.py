"""Command-line entrypoint: ``rates``, ``chebsolve``, ``run`` and ``thresholds``.

Exit codes: 0 on success, 1 on usage or configuration errors, 2 on numerical
failures (non-converged solves, divergence, fired invariant checks).
"""

import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from src.cli.commands import COMMANDS
from src.cli.output import write_csv, write_plot
from src.cli.settings import load_experiment, parse_overrides
from src.config import REPO_ROOT, AppConfig, load_config
from src.errors import CaaError
from src.logging_utils import configure_logging, perf_span

LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors with exit code 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        allow_abbrev=False,
        description="Rates, bounds and guarded runs for constrained Anderson acceleration.",
        epilog="Any experiment key can be overridden with --<key> <value>, e.g. --rho 0.999 --k 5 --C 1:cstar:40:log.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS), help="Command to run.")
    parser.add_argument("--config", type=Path, default=None, help="Experiment file with 'key = value' lines.")
    parser.add_argument("--out", type=Path, default=None, help="CSV output path (default: stdout).")
    parser.add_argument(
        "--plot",
        action="store_true",
        help="Also write a static plot next to the CSV (requires --out).",
    )
    parser.add_argument("--seed", type=int, default=None, help="Seed for operator construction and start points.")
    parser.add_argument(
        "--log-level",
        type=str,
        default=None,
        help="Override LOG_LEVEL for this run (DEBUG, INFO, WARNING, ...).",
    )
    parser.add_argument(
        "--workers",
        type=int,
        default=None,
        help="Threads for independent sweep points and runs (default: CAA_WORKERS or 1).",
    )
    return parser


def _fallback_config() -> AppConfig:
    return AppConfig(log_directory=REPO_ROOT / "logs", log_level="INFO")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)

    try:
        config = load_config()
    except Exception as exc:  # noqa: BLE001 - log and exit gracefully with a file
        configure_logging(_fallback_config())
        LOGGER.error("Failed to load configuration: %s", exc)
        return EXIT_USAGE

    if args.log_level:
        config = dataclasses.replace(config, log_level=args.log_level.upper())
    configure_logging(config)

    try:
        overrides = parse_overrides(extra)
        if args.seed is not None:
            overrides["seed"] = str(args.seed)
        experiment = load_experiment(args.config, overrides)
        if args.workers is not None and args.workers < 1:
            raise ValueError(f"--workers must be >= 1, got {args.workers}")
    except (ValueError, OSError) as exc:
        LOGGER.error("Invalid experiment configuration: %s", exc)
        return EXIT_USAGE

    out = args.out or (Path(experiment.out) if experiment.out else None)
    if args.plot and out is None:
        LOGGER.error("--plot needs an output path (--out or 'out' in the config)")
        return EXIT_USAGE
    workers = args.workers or config.default_workers

    try:
        with perf_span("cli." + args.command, tags={"rho": experiment.rho, "k": experiment.k}, logger=LOGGER):
            table = COMMANDS[args.command](experiment, workers=workers)
    except ValueError as exc:
        LOGGER.error("%s failed: %s", args.command, exc)
        return EXIT_USAGE
    except CaaError as exc:
        LOGGER.error("%s failed: %s", args.command, exc)
        return EXIT_NUMERICAL

    write_csv(table, out)
    if args.plot:
        write_plot(table, out.with_suffix("." + config.plot_format))

    if table.failed:
        LOGGER.error("%s finished with failures", args.command)
        return EXIT_NUMERICAL
    return EXIT_OK


__all__ = ["EXIT_NUMERICAL", "EXIT_OK", "EXIT_USAGE", "build_parser", "main"]
