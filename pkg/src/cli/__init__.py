"""Command-line harness: experiment settings, commands and CSV/plot output."""

from .commands import COMMANDS, cmd_chebsolve, cmd_rates, cmd_run, cmd_thresholds
from .main import main
from .output import Table
from .settings import ExperimentConfig, load_experiment, parse_budgets, parse_overrides

__all__ = [
    "COMMANDS",
    "ExperimentConfig",
    "Table",
    "cmd_chebsolve",
    "cmd_rates",
    "cmd_run",
    "cmd_thresholds",
    "load_experiment",
    "main",
    "parse_budgets",
    "parse_overrides",
]
