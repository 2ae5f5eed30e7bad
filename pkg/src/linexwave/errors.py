"""Exception hierarchy shared by all linexwave modules.

The CLI maps these onto exit codes: parameter/input problems exit with
status 2, numeric failures with status 3.
"""


class LinexWaveError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(LinexWaveError, ValueError):
    """A parameter value violates its documented constraints."""


class InputError(LinexWaveError, ValueError):
    """User-supplied data (signal, file, config) is malformed."""


class NumericError(LinexWaveError, ArithmeticError):
    """A numerical routine produced a non-finite or impossible result."""
