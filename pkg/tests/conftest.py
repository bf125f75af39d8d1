"""Shared pytest fixtures for the CAA toolkit tests.

Keeps tests deterministic (seeded generators) and isolated (logs under
``tmp_path``, never the repository ``logs/`` directory).
"""

from pathlib import Path

import numpy as np
import pytest

from src.config import AppConfig


@pytest.fixture
def app_config(tmp_path: Path) -> AppConfig:
    """Application config fixture pointing logging to a temporary directory."""
    return AppConfig(
        log_directory=tmp_path,
        log_level="INFO",
    )


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator so random instances are reproducible across runs."""
    return np.random.default_rng(20240521)


@pytest.fixture
def isolated_env(tmp_path: Path, monkeypatch) -> Path:
    """Point LOG_DIR at ``tmp_path`` and clear the CAA_* keys for CLI tests."""
    monkeypatch.setenv("LOG_DIR", str(tmp_path / "logs"))
    for key in ("LOG_LEVEL", "APP_NAME", "CAA_WORKERS", "CAA_PLOT_FORMAT"):
        monkeypatch.delenv(key, raising=False)
    monkeypatch.setattr("src.config.DEFAULT_ENV_FILE", tmp_path / "missing.env")
    return tmp_path
