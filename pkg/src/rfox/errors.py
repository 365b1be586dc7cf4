"""Exception hierarchy shared by every rfox module.

The CLI maps these onto process exit codes: invalid input -> 1,
resource limit -> 2, numerical failure -> 3.
"""


class RfoxError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class InvalidParameterError(RfoxError, ValueError):
    """A parameter or input violates an operation's preconditions."""

    exit_code = 1


class SchemaError(InvalidParameterError):
    """A serialized file is malformed or violates a data invariant."""


class ResourceLimitError(RfoxError):
    """Requested problem size exceeds a configured limit."""

    exit_code = 2


class NumericalError(RfoxError):
    """An iterative or integration routine failed to reach its tolerance."""

    exit_code = 3
