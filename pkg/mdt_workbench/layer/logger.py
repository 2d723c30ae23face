"""
MDT Workbench - Logger

Structured logging for pipeline stages and training loops. Every record
is one JSON object on stderr: timestamp, level, logger, message, then
the keyword context of the call.
"""

import logging
import os
import sys
import time
from collections.abc import Iterator
from contextlib import contextmanager
from typing import Any

import orjson

LEVEL_ENV = "MDT_LOG_LEVEL"


class JSONFormatter(logging.Formatter):
    """Render a record and its ``context`` attribute as one JSON line."""

    def format(self, record: logging.LogRecord) -> str:
        log_data: dict[str, Any] = {
            "timestamp": self.formatTime(record),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        log_data.update(getattr(record, "context", None) or {})
        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)
        # numpy scalars and arrays show up in training summaries
        return orjson.dumps(log_data, option=orjson.OPT_SERIALIZE_NUMPY, default=str).decode()


def _std_logger(name: str) -> logging.Logger:
    std = logging.getLogger(name)
    if not any(isinstance(h.formatter, JSONFormatter) for h in std.handlers):
        std.handlers.clear()
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(JSONFormatter())
        std.addHandler(handler)
        std.propagate = False
    return std


class StructuredLogger:
    """JSON logger with keyword context.

    ``bind`` returns a logger that adds fixed fields (stage name, word,
    band ...) to every record; bound loggers share the underlying
    handler and level.
    """

    def __init__(self, name: str, level: str | None = None, context: dict[str, Any] | None = None) -> None:
        self.logger = _std_logger(name)
        self.context = dict(context or {})
        if level or not self.logger.level:
            self.set_level(level or os.getenv(LEVEL_ENV, "INFO"))

    def bind(self, **context: Any) -> "StructuredLogger":
        child = StructuredLogger.__new__(StructuredLogger)
        child.logger = self.logger
        child.context = {**self.context, **context}
        return child

    def set_level(self, level: str) -> None:
        self.logger.setLevel(getattr(logging, level.upper()))

    def is_enabled(self, level: str) -> bool:
        return self.logger.isEnabledFor(getattr(logging, level.upper()))

    def log(self, level: str, message: str, **kwargs: Any) -> None:
        lvl = getattr(logging, level.upper())
        if self.logger.isEnabledFor(lvl):
            self.logger.log(lvl, message, extra={"context": {**self.context, **kwargs}})

    def debug(self, message: str, **kwargs: Any) -> None:
        self.log("debug", message, **kwargs)

    def info(self, message: str, **kwargs: Any) -> None:
        self.log("info", message, **kwargs)

    def warning(self, message: str, **kwargs: Any) -> None:
        self.log("warning", message, **kwargs)

    def error(self, message: str, **kwargs: Any) -> None:
        self.log("error", message, **kwargs)

    def critical(self, message: str, **kwargs: Any) -> None:
        self.log("critical", message, **kwargs)

    @contextmanager
    def timed(self, message: str, **kwargs: Any) -> Iterator[dict[str, Any]]:
        """Log ``message`` with ``elapsed_s`` when the block completes.

        The yielded dict collects extra fields for the record; ``elapsed_s``
        is written back into it. Nothing is logged if the block raises.

        Example:
            with logger.timed("Stage finished", stage="train-hmm") as done:
                done["outputs"] = len(run())
        """
        fields: dict[str, Any] = {}
        start = time.perf_counter()
        yield fields
        fields["elapsed_s"] = round(time.perf_counter() - start, 3)
        self.info(message, **kwargs, **fields)


_LOGGERS: dict[str, StructuredLogger] = {}


def get_logger(name: str, level: str | None = None) -> StructuredLogger:
    """Get or create the structured logger for ``name`` (usually __name__)."""
    if name not in _LOGGERS:
        _LOGGERS[name] = StructuredLogger(name, level)
    elif level:
        _LOGGERS[name].set_level(level)
    return _LOGGERS[name]


def set_global_level(level: str) -> None:
    """Apply a level to every logger created so far and to later ones."""
    os.environ[LEVEL_ENV] = level.upper()
    for structured in _LOGGERS.values():
        structured.set_level(level)
