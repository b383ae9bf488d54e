"""Exception types shared by the engines and the command line."""


class ToolkitError(Exception):
    """Base class for every error raised on purpose by this package."""


class DomainError(ToolkitError, ValueError):
    """A point or parameter lies outside the domain of an operation."""


class UnsupportedDimensionError(DomainError):
    """The likelihood engine needs an odd simplex dimension n = 2k - 1."""


class DataError(ToolkitError, ValueError):
    """Bad corpus, vocabulary or model file content."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericError(ToolkitError, ArithmeticError):
    """Non-finite likelihood or gradient, or an optimizer that cannot proceed."""


class UsageError(ToolkitError):
    """Invalid command-line arguments."""
