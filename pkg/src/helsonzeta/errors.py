"""Exception hierarchy for the helsonzeta package."""


class HelsonError(Exception):
    """Base class for all package errors."""


class StripViolation(HelsonError):
    """A target location lies outside the open strip alpha < Re s < 1."""


class OverlapError(HelsonError):
    """The same location appears both as a zero and as a pole."""


class PoleHit(HelsonError):
    """Evaluation requested within the pole clearance of a singularity."""


class SeparationError(HelsonError):
    """Two pole groups are too close for stable coefficient extraction."""


class ExponentOutOfRange(HelsonError):
    """A kernel exponent with Re a >= 1 cannot produce a decaying kernel."""


class DegenerateExponent(HelsonError):
    """An integrand exponent outside the supported closed-form family."""


class BudgetExceeded(HelsonError):
    """The Fourier inversion grid would exceed the configured sample cap."""


class DomainError(HelsonError):
    """Evaluation requested outside an operation's half-plane of validity."""


class AmbiguousWinding(HelsonError):
    """Winding-number rounding defect exceeds the acceptance threshold."""


class PathBlocked(HelsonError):
    """No integration path with the required clearance could be routed."""


class OutOfRange(HelsonError):
    """Prime or integer argument beyond the built table's range."""


class NotPrime(HelsonError):
    """A prime-indexed lookup was called with a composite number."""


class FormatError(HelsonError):
    """A table or config file does not conform to its line format."""


class ChecksumMismatch(HelsonError):
    """A table file's trailing hash does not match its contents."""
