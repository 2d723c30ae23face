"""
MDT Workbench - Error Handler

Centralized error handling decorator for CLI subcommands.
"""

import functools
import traceback
from collections.abc import Callable
from typing import Any, TypeVar, cast

from pydantic import ValidationError

from mdt_workbench.layer.errors import (
    ConfigError,
    FormatError,
    InputValidationError,
    MissingArtifactError,
    StageError,
)
from mdt_workbench.layer.logger import get_logger
from mdt_workbench.layer.status import ExitStatus, error_status

F = TypeVar("F", bound=Callable[..., Any])

logger = get_logger(__name__)


def handle_errors(func: F) -> F:
    """Decorator to handle errors in CLI subcommands.

    Catches workbench exceptions and maps them onto exit statuses:
    validation problems exit with 1, runtime failures with 2.
    Logs all errors with full context.

    Usage:
        @handle_errors
        def cmd_decode(args):
            ...
            return ExitStatus.OK

    Args:
        func: Subcommand function returning an ExitStatus

    Returns:
        Wrapped function with error handling
    """

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> ExitStatus:
        command = func.__name__.removeprefix("cmd_").replace("_", "-")
        try:
            return ExitStatus(func(*args, **kwargs))

        except ValidationError as e:
            # Pydantic validation error in a config section
            logger.error("Validation error", command=command, errors=e.errors())
            return error_status(
                ExitStatus.VALIDATION_ERROR,
                "ValidationError",
                "Invalid configuration",
                {"errors": len(e.errors()), "first": e.errors()[0].get("msg", "")},
            )

        except MissingArtifactError as e:
            logger.error(
                "Missing artifact", command=command, artifact=e.artifact, producer=e.producer
            )
            return error_status(ExitStatus.VALIDATION_ERROR, "MissingArtifact", str(e))

        except ConfigError as e:
            logger.error("Config error", command=command, error=str(e))
            return error_status(ExitStatus.VALIDATION_ERROR, "ConfigError", str(e))

        except (InputValidationError, FormatError) as e:
            logger.error("Input error", command=command, error=str(e))
            return error_status(ExitStatus.VALIDATION_ERROR, type(e).__name__, str(e))

        except StageError as e:
            logger.critical(
                "Stage failed",
                command=command,
                stage=e.stage,
                error=str(e.cause),
                error_type=type(e.cause).__name__,
                traceback="".join(traceback.format_exception(e.cause)),
            )
            return error_status(
                ExitStatus.RUNTIME_FAILURE, "StageError", str(e), {"stage": e.stage}
            )

        except Exception as e:
            # Catch-all for unexpected errors
            logger.critical(
                "Unexpected error",
                command=command,
                error=str(e),
                error_type=type(e).__name__,
                traceback=traceback.format_exc(),
            )
            return error_status(ExitStatus.RUNTIME_FAILURE, "InternalError", str(e))

    return cast(F, wrapper)
