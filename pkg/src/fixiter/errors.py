"""Exception hierarchy shared by the library and the CLI."""


class FixiterError(Exception):
    """Base class for all errors raised by fixiter."""

    exit_code = 3


class ConfigError(FixiterError, ValueError):
    """Invalid configuration: unknown ids, bad parameters, violated preconditions."""

    exit_code = 2


class DomainError(FixiterError, ValueError):
    """A point left the domain it was required to stay in."""

    exit_code = 3


class NumericError(FixiterError, ArithmeticError):
    """Non-finite iterate or failed convergence."""

    exit_code = 3
