"""Exception types shared across the package.

Every error carries a stable machine-readable ``code`` so the CLI and the
HTTP server can map failures without string matching.
"""


class CommflowError(Exception):
    """Base class for all domain errors."""

    code = "error"


class ParseError(CommflowError):
    """Raised in strict mode when a record cannot be parsed."""

    code = "parse-error"

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class InvalidPairError(CommflowError):
    """Raised when a pair query names the same entity twice."""

    code = "invalid-pair"


class UnknownEntityError(CommflowError):
    """Raised when a pair query names an entity absent from the log."""

    code = "unknown-entity"


class InvalidIntervalError(CommflowError):
    """Raised when an integration interval has t0 > t1."""

    code = "invalid-interval"


class EmptyEpisodeError(CommflowError):
    """Raised when features are requested for an episode with no events."""

    code = "empty-episode"


class EmptyTrainingError(CommflowError):
    """Raised when training is attempted with no examples."""

    code = "empty-training"


class NeedsBothClassesError(CommflowError):
    """Raised when a training set contains only one label."""

    code = "needs-both-classes"


class EmptyCombinationError(CommflowError):
    """Raised when combining an empty list of models."""

    code = "empty-combination"
