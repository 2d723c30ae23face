"""Cross-cutting infrastructure: logging, errors, exit statuses."""

from mdt_workbench.layer.errors import (
    ConfigError,
    ConstantModelRequired,
    FormatError,
    InfeasibleAlignmentError,
    InputValidationError,
    MissingArtifactError,
    StageError,
    WorkbenchError,
)
from mdt_workbench.layer.logger import get_logger
