"""Logging setup for prv-composer.

Reports go to stdout, so log records are written to stderr.
"""

import json
import logging
import sys
from typing import Any

from prv_composer.config import LoggingConfig

PACKAGE_LOGGER = "prv_composer"
CONSOLE_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
# Passed through ``extra=`` by the precision policy.
AUDIT_FIELDS = ("audit", "field", "value")


class JsonFormatter(logging.Formatter):
    """One JSON object per record, audit fields included."""

    def format(self, record: logging.LogRecord) -> str:
        payload: dict[str, Any] = {
            "timestamp": self.formatTime(record),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        for name in AUDIT_FIELDS:
            if hasattr(record, name):
                payload[name] = getattr(record, name)
        return json.dumps(payload, default=str)


def setup_logging(config: LoggingConfig) -> logging.Logger:
    """Configure the root handler and the package logger from ``config``."""
    level = logging.getLevelName(config.level.upper())
    if not isinstance(level, int):
        level = logging.WARNING

    handler = logging.StreamHandler(sys.stderr)
    if config.format == "json":
        handler.setFormatter(JsonFormatter())
    else:
        handler.setFormatter(logging.Formatter(CONSOLE_FORMAT))
    logging.basicConfig(level=level, handlers=[handler], force=True)

    logger = logging.getLogger(PACKAGE_LOGGER)
    logger.setLevel(level)
    return logger


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(f"{PACKAGE_LOGGER}.{name}")
