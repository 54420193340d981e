"""Exception types shared across the package."""


class RadnlsError(Exception):
    """Base class for all radnls errors."""


class InvalidExponentError(RadnlsError):
    """Lebesgue exponent outside [1, inf], or power outside the admissible range."""


class GridMismatchError(RadnlsError):
    """Operands live on different grids."""


class InvalidBoundStateError(RadnlsError):
    """A profile that must be real and strictly positive is not."""


class SpectralConditionError(RadnlsError):
    """The potential does not carry exactly one negative eigenvalue."""


class BranchRangeError(RadnlsError):
    """|a| outside the computed branch extent."""


class ContinuationError(RadnlsError):
    """Newton continuation failed; carries the last converged amplitude."""

    def __init__(self, message, last_good_a=None):
        super().__init__(message)
        self.last_good_a = last_good_a


class PositivityError(RadnlsError):
    """A branch profile changed sign."""


class WindowError(RadnlsError):
    """Requested data outside the reliable space-time window."""


class BlowupError(RadnlsError):
    """Sup-norm growth beyond the instability guard."""


class NumericsError(RadnlsError):
    """NaN or infinite values appeared during a computation."""


class FitWindowError(RadnlsError):
    """Too few samples, or too short a time span, for an exponent fit."""


class ConfigError(RadnlsError):
    """Malformed or incomplete run configuration."""
