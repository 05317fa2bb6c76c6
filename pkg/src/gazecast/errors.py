"""Exception taxonomy shared across the package."""


class GazecastError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(GazecastError):
    """Tensor or array dimensions do not agree."""


class ContractError(GazecastError):
    """A documented precondition was violated (including non-finite values)."""


class ParseError(GazecastError):
    """Malformed text input; carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class DataError(GazecastError):
    """Input parsed but is semantically invalid (e.g. non-monotone frames)."""


class ConfigError(GazecastError):
    """Invalid run configuration or missing required artifact."""


class RangeError(GazecastError):
    """Queried value lies outside the covered span."""


class SessionValidationError(GazecastError):
    """A gaze session violates the session schema.

    `field` names the offending field and `sample_index` the offending
    sample, when applicable; both end up in service error bodies.
    """

    def __init__(self, message, field=None, sample_index=None):
        super().__init__(message)
        self.field = field
        self.sample_index = sample_index
