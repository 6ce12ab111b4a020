"""Exception types shared across the package."""


class GPFQError(Exception):
    """Base class for all package errors."""


class NotPrimePower(GPFQError, ValueError):
    pass


class DivisionByZero(GPFQError, ZeroDivisionError):
    pass


class BudgetExceeded(GPFQError):
    """Raised when an enumeration or search would exceed its configured budget.

    ``partial`` carries whatever the caller could salvage (may be None).
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class MixedAmbient(GPFQError, ValueError):
    pass


class WrongDimension(GPFQError, ValueError):
    pass


class EmptyHypergraph(GPFQError, ValueError):
    pass


class IdentityFailed(GPFQError):
    pass


class RoundLimit(GPFQError):
    """Container iteration hit its round cap; ``partial`` is the unfinished family."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
