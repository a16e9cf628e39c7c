"""Exception hierarchy shared by the library and the command-line front end."""


class EnumerationError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigError(EnumerationError, ValueError):
    """Invalid parameters or configuration document."""

    exit_code = 1


class DomainError(EnumerationError, ValueError):
    """An input violates a mathematical precondition (non-Hermitian, duplicate angles, ...)."""

    exit_code = 2


class DataError(EnumerationError, ValueError):
    """Malformed or degenerate input data."""

    exit_code = 2


class NumericalError(EnumerationError, ArithmeticError):
    """A linear-algebra routine failed to converge."""

    exit_code = 3
