"""Shared exception types.

Every error raised on purpose by this package derives from SwaveError, so
callers can catch one type at the CLI boundary and map it to an exit code.
"""


class SwaveError(Exception):
    """Base class for all errors raised by swave."""


class InvalidParameterError(SwaveError, ValueError):
    """An argument violates a documented precondition."""


class NumericFailureError(SwaveError, ArithmeticError):
    """A numeric routine failed to converge or produced a non-finite value."""


class ResourceLimitError(SwaveError, RuntimeError):
    """A configured cap (truncation order, sample budget, ...) was exceeded.

    The message states the offending requirement so the caller can decide
    whether to raise the cap.
    """


class QueryBudgetError(ResourceLimitError):
    """An oracle refused a query because its budget is exhausted."""


class ConfigError(SwaveError, ValueError):
    """A config file or CLI flag combination cannot be interpreted."""
