"""
MDT Workbench - Error Types

Exception hierarchy shared by every module. The CLI maps these onto
exit statuses in ``error_handler``.
"""


class WorkbenchError(Exception):
    """Base class for all workbench errors."""


class InputValidationError(WorkbenchError, ValueError):
    """Invalid input to a pure operation (bad shape, non-finite audio, ...)."""


class ConfigError(WorkbenchError):
    """Malformed or inconsistent configuration file."""


class FormatError(WorkbenchError, ValueError):
    """Malformed binary or text artifact (bad magic, truncated payload)."""


class MissingArtifactError(WorkbenchError):
    """A stage was asked to run before the artifact it needs exists."""

    def __init__(self, artifact: str, producer: str | None = None) -> None:
        self.artifact = artifact
        self.producer = producer
        hint = f" (run '{producer}' first)" if producer else ""
        super().__init__(f"Missing artifact: {artifact}{hint}")


class InfeasibleAlignmentError(WorkbenchError, ValueError):
    """No path through the transcription graph fits the utterance."""


class ConstantModelRequired(WorkbenchError, ValueError):
    """SVM training data holds a single class; the caller must use a constant predictor."""

    def __init__(self, label: bool) -> None:
        self.label = label
        super().__init__(f"Single-class training data (label={label}); constant model required")


class StageError(WorkbenchError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, cause: BaseException) -> None:
        self.stage = stage
        self.cause = cause
        super().__init__(f"Stage '{stage}' failed: {type(cause).__name__}: {cause}")
