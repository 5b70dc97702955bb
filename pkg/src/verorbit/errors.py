"""Exception hierarchy shared by all modules."""


class VerorbitError(Exception):
    """Base class for every error raised by this package."""


class ParseError(VerorbitError, ValueError):
    """Malformed decimal or hex-float string."""


class InvalidPrecision(VerorbitError, ValueError):
    """Mantissa length outside the supported range."""


class DomainError(VerorbitError, ArithmeticError):
    """Operation undefined for its operands (division by zero, empty domain)."""


class PrecisionTooSmall(VerorbitError):
    """K * 2**-m is not below one, so the roundoff bound is undefined."""


class DomainEscape(DomainError):
    """An iterate left the phase space by more than its error radius."""


class InvalidParameter(VerorbitError, ValueError):
    """Map parameter outside its admissible range."""


class InvalidShift(InvalidParameter):
    """A shift that leaves zero inside the transformed domain."""


class OracleTooLarge(VerorbitError):
    """Exact rational iteration would exceed the size guard."""


class NotConverged(VerorbitError):
    """An operation needed a converged orbit run but got something else."""
