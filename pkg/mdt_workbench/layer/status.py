"""
MDT Workbench - Exit Status Formatter

Standardized process exit statuses and error lines for the CLI.
"""

import sys
from enum import IntEnum
from typing import Any, TextIO


class ExitStatus(IntEnum):
    """Process exit statuses of every subcommand."""

    OK = 0
    VALIDATION_ERROR = 1
    RUNTIME_FAILURE = 2


def error_status(
    status: ExitStatus,
    error: str,
    message: str | None = None,
    details: dict[str, Any] | None = None,
    stream: TextIO | None = None,
) -> ExitStatus:
    """Write a standardized error line and return the exit status.

    Args:
        status: Exit status to return
        error: Error type/code (e.g., "ValidationError", "MissingArtifact")
        message: Human-readable error message
        details: Additional error details, printed as key=value pairs
        stream: Output stream (default: stderr)

    Returns:
        The given exit status

    Example:
        return error_status(ExitStatus.VALIDATION_ERROR, "ConfigError", "unknown key 'foo'")
    """
    out = stream or sys.stderr
    line = f"error: {error}"
    if message:
        line += f": {message}"
    if details:
        line += " (" + ", ".join(f"{k}={v}" for k, v in details.items()) + ")"
    print(line, file=out)
    return status
