"""Configuration utilities for the constrained Anderson acceleration toolkit.

This module reads environment variables (optionally from an `.env` file) and
produces the application configuration consumed by the CLI and logging setup.

Supported keys: `LOG_DIR`, `LOG_LEVEL`, `APP_NAME`, `CAA_WORKERS` (default
thread count for sweeps and multi-C runs) and `CAA_PLOT_FORMAT` (svg, pdf or
png for `--plot`).

Usage example:

    from src.config import load_config

    config = load_config()
    configure_logging(config)
"""

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Mapping, MutableMapping, Optional

REPO_ROOT = Path(__file__).resolve().parents[1]
DEFAULT_ENV_FILE = REPO_ROOT / ".env"
PLOT_FORMATS = ("svg", "pdf", "png")


def _load_env_file(path: Path) -> Dict[str, str]:
    """Parse a dotenv-style file into a dictionary."""
    if not path.exists():
        return {}

    data: Dict[str, str] = {}
    for raw_line in path.read_text(encoding="utf-8").splitlines():
        line = raw_line.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        key, value = line.split("=", 1)
        data[key.strip()] = value.strip().strip("\"'")
    return data


@dataclass(frozen=True)
class AppConfig:
    """Application-level configuration values."""

    log_directory: Path
    log_level: str
    app_name: str = "caa-bounds"
    default_workers: int = 1
    plot_format: str = "svg"


def _merge_envs(dotenv_values: Mapping[str, str], env: MutableMapping[str, str]) -> Dict[str, str]:
    """Merge dotenv values with the current environment, preferring os.environ."""
    merged = dict(dotenv_values)
    merged.update(env)  # os.environ wins
    return merged


def _parse_workers(raw: Optional[str]) -> int:
    if raw is None or raw.strip() == "":
        return 1
    try:
        workers = int(raw)
    except ValueError as exc:
        raise ValueError(f"CAA_WORKERS must be an integer, got {raw!r}") from exc
    if workers < 1:
        raise ValueError(f"CAA_WORKERS must be >= 1, got {workers}")
    return workers


def load_config(env_file: Optional[Path] = None) -> AppConfig:
    """Load configuration values using environment defaults."""
    merged = load_environment(env_file)

    log_directory = Path(merged.get("LOG_DIR", REPO_ROOT / "logs"))
    if not log_directory.is_absolute():
        log_directory = REPO_ROOT / log_directory

    plot_format = merged.get("CAA_PLOT_FORMAT", "svg").strip().lower()
    if plot_format not in PLOT_FORMATS:
        raise ValueError(f"CAA_PLOT_FORMAT must be one of {', '.join(PLOT_FORMATS)}, got {plot_format!r}")

    return AppConfig(
        log_directory=log_directory,
        log_level=merged.get("LOG_LEVEL", "INFO").upper(),
        app_name=merged.get("APP_NAME", "caa-bounds"),
        default_workers=_parse_workers(merged.get("CAA_WORKERS")),
        plot_format=plot_format,
    )


def load_environment(env_file: Optional[Path] = None) -> Dict[str, str]:
    """Load environment variables merged with optional dotenv file.

    Args:
        env_file: Specific dotenv file to read, defaulting to repo-level `.env`.

    Returns:
        Dictionary of environment variables with `os.environ` values taking precedence.
    """
    target_file = env_file or DEFAULT_ENV_FILE
    dotenv_values = _load_env_file(target_file)
    return _merge_envs(dotenv_values, os.environ)


__all__ = ["AppConfig", "PLOT_FORMATS", "load_config", "load_environment", "REPO_ROOT"]
