"""Exception types shared across the package."""


class W2MisfitError(Exception):
    """Base class for all package errors."""


class GridMismatch(W2MisfitError):
    """Two fields/signals were expected on the same grid but are not."""


class ZeroMass(W2MisfitError):
    """A density that must have positive mass integrates to zero."""


class MassMismatchUnresolvable(W2MisfitError):
    """One signed component has mass in exactly one of the two signals."""


class SupportTooLarge(W2MisfitError):
    """The padded support rectangle does not fit inside the grid."""


class SingularSystem(W2MisfitError):
    """The Newton linear system is singular (delta too small or degenerate data)."""


class NoConvergence(W2MisfitError):
    """Newton's method did not reach the residual tolerance."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class EventOutsideWindow(W2MisfitError):
    """A reflection event falls outside the modelled time window."""
