"""Exception types shared across the toolkit."""


class ShapeError(ValueError):
    """Array shapes are inconsistent with an operation's contract."""


class NumericError(ArithmeticError):
    """Non-finite values appeared where finite ones are required."""


class UsageError(RuntimeError):
    """API called out of order, e.g. backward before forward."""


class ParseError(ValueError):
    """Malformed input file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class DataError(ValueError):
    """Semantically invalid data (e.g. non-monotonic timestamps)."""


class CoverageError(DataError):
    """Ground truth does not span the requested time range."""


class DegenerateChannelError(DataError):
    """A channel has zero spread, so it cannot be normalized."""

    def __init__(self, channel: str):
        self.channel = channel
        super().__init__(f"channel '{channel}' has zero spread")


class ConfigError(ValueError):
    """Invalid or unknown keys in a configuration file."""


class StageError(RuntimeError):
    """Failure wrapped with the pipeline stage where it occurred."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")
