"""Exception types raised by the analysis routines."""


class ErgodescError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(ErgodescError, ValueError):
    """An argument is outside the domain an operation accepts."""


class UndefinedDescriptorError(ErgodescError, ArithmeticError):
    """A descriptor has no defined value for the given input (e.g. CV at zero mean)."""


class InsufficientScalesError(UndefinedDescriptorError):
    """Too few usable scales remain for a log-log regression."""


class DegenerateInputError(UndefinedDescriptorError):
    """Input carries no mass (all-zero series) and cannot be normalized."""


class ExtremeQError(UndefinedDescriptorError):
    """Moment order q overflows or underflows the mass computation."""
