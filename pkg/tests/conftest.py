"""Shared fixtures."""

import json
import logging
from collections.abc import Callable
from pathlib import Path
from typing import Any

import pytest

from prv_composer.accountant import PrvAccountant
from prv_composer.config import Config


@pytest.fixture(autouse=True)
def _isolated_settings(monkeypatch: pytest.MonkeyPatch) -> None:
    for name in (
        "PRV_COMPOSER_CONFIG_FILE",
        "PRV_COMPOSER_NUMERICS__QUADRATURE_REFINE",
        "PRV_COMPOSER_BUDGET__EPS_UPPER_METHOD",
        "PRV_COMPOSER_LOGGING__LEVEL",
    ):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def logger() -> logging.Logger:
    return logging.getLogger("prv_composer.tests")


@pytest.fixture
def accountant(logger: logging.Logger) -> PrvAccountant:
    return PrvAccountant(Config(), logger)


@pytest.fixture
def write_job(tmp_path: Path) -> Callable[..., Path]:
    """Write a compose job as JSON and return its path."""

    def write(job: dict[str, Any], name: str = "job.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(job), encoding="utf-8")
        return path

    return write
