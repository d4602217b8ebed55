"""Logging configuration"""

import logging
import sys
from typing import Any, Dict, Optional

from app.core.config import settings

# Attributes every LogRecord carries; anything else arrived through extra={...}
_RECORD_FIELDS = frozenset(vars(logging.LogRecord("", 0, "", 0, "", (), None))) | {"message", "asctime"}

# Keys that are too bulky for a single log line
_HIDDEN_FIELDS = frozenset({"traceback"})


def _render(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def context_fields(record: logging.LogRecord) -> Dict[str, Any]:
    """Structured fields attached to a record via extra={...}, in insertion order"""
    return {
        key: value
        for key, value in vars(record).items()
        if key not in _RECORD_FIELDS and key not in _HIDDEN_FIELDS and not key.startswith("_")
    }


class ContextFormatter(logging.Formatter):
    """Appends extra={...} fields as key=value pairs; colors the level name in debug mode"""

    COLORS = {
        logging.DEBUG: "\x1b[38;20m",
        logging.INFO: "\x1b[38;20m",
        logging.WARNING: "\x1b[33;20m",
        logging.ERROR: "\x1b[31;20m",
        logging.CRITICAL: "\x1b[31;1m",
    }
    RESET = "\x1b[0m"

    def __init__(self, fmt: str, datefmt: Optional[str] = None, color: bool = False):
        super().__init__(fmt, datefmt=datefmt)
        self.color = color

    def format(self, record: logging.LogRecord) -> str:
        fields = context_fields(record)
        levelname = record.levelname
        if self.color:
            record.levelname = f"{self.COLORS.get(record.levelno, '')}{levelname}{self.RESET}"
        try:
            line = super().format(record)
        finally:
            record.levelname = levelname
        if fields:
            line += " | " + " ".join(f"{key}={_render(value)}" for key, value in fields.items())
        return line


def resolve_level(level: Optional[int] = None) -> int:
    """Pick the effective level from an explicit value or the settings"""
    if level is not None:
        return level
    if settings.debug:
        return logging.DEBUG
    resolved = logging.getLevelName(settings.log_level.upper())
    return resolved if isinstance(resolved, int) else logging.INFO


def setup_logging(
    name: Optional[str] = None,
    level: Optional[int] = None
) -> logging.Logger:
    """Setup logging configuration"""
    logger = logging.getLogger(name or "ileg")

    if logger.handlers:
        return logger

    log_level = resolve_level(level)
    logger.setLevel(log_level)

    # stdout carries progress; stderr is reserved for one-line CLI diagnostics
    handler = logging.StreamHandler(sys.stdout)
    handler.setLevel(log_level)
    handler.setFormatter(
        ContextFormatter(
            "[%(asctime)s] %(levelname)s [%(name)s:%(lineno)d] %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
            color=settings.debug,
        )
    )

    logger.addHandler(handler)
    return logger


logger = setup_logging()
