"""Exception types shared across the package."""


class AzMapError(Exception):
    """Base class for all errors raised by azmap."""


class SingularHit(AzMapError):
    """An iterate landed exactly on a discontinuity line under the Halt policy."""

    def __init__(self, message, step=None, angle=None, action=None):
        super().__init__(message)
        self.step = step
        self.angle = angle
        self.action = action


class DomainError(AzMapError, ValueError):
    """The map (or an analysis) is undefined for the given state or parameters."""


class BudgetExceeded(AzMapError):
    """A first return did not happen within the iteration budget."""


class NonIntegerPrediction(AzMapError):
    """The step-count formula produced a value too far from an integer."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class UsageError(AzMapError):
    """Invalid experiment configuration or command line."""
