"""Exception hierarchy shared by all toolkit modules.

Exit-code convention for the CLI: 1 for validation errors, 2 for IO and
file-format errors, 3 for internal invariant violations.
"""


class ToolkitError(Exception):

    exit_code = 1


class ValidationError(ToolkitError):
    """Input data or arguments violate a documented precondition."""

    exit_code = 1


class EmptyInput(ValidationError):
    pass


class MovieMismatch(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class IndexOutOfRange(ValidationError):
    pass


class EmptyUnion(ValidationError):
    pass


class EmptySet(ValidationError):
    pass


class DegenerateLabels(ValidationError):
    pass


class TooFewMovies(ValidationError):
    pass


class NoSalientScenes(ValidationError):
    pass


class InconsistentCorpus(ValidationError):
    pass


class FileFormatError(ToolkitError):
    """An on-disk artifact is corrupt or does not match its declared format."""

    exit_code = 2


class StageError(ToolkitError):
    """A pipeline stage failed; the message names the stage and the cause."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 3 if not isinstance(cause, OSError) else 2)
