"""Exception hierarchy for prv-composer.

Every error carries a short machine token (``code``) and the process exit code the
command-line front-end reports for it.
"""


class PrvComposerError(Exception):
    """Base class for all errors raised by prv-composer."""

    code = "internal"
    exit_code = 1


class ParameterError(PrvComposerError, ValueError):
    """An argument is outside the range an operation accepts."""

    code = "parameter"
    exit_code = 2


class DomainError(PrvComposerError, ValueError):
    """The input is well-formed but the quantity asked for does not exist."""

    code = "domain"
    exit_code = 2


class QueryRangeError(PrvComposerError, ValueError):
    """A curve query falls outside the window the error budget covers."""

    code = "range"
    exit_code = 2


class UnsupportedMechanismError(PrvComposerError, ValueError):
    """A transform was applied to a mechanism it is not defined for."""

    code = "unsupported"
    exit_code = 2


class PrecisionFloorError(PrvComposerError, ValueError):
    """A delta target or delta error lies below the supported floating-point floor."""

    code = "precision"
    exit_code = 3


class OutputError(PrvComposerError, OSError):
    """A report or curve file could not be read or written."""

    code = "io"
    exit_code = 4


class NumericalGuardError(PrvComposerError, RuntimeError):
    """A numerical safety check failed (e.g. too much mass clamped after an FFT)."""

    code = "numerical"
    exit_code = 5
