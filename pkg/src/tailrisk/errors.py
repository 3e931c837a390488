"""Exception types shared across the package."""


class TailRiskError(Exception):
    """Base class for all package errors."""


class DomainError(TailRiskError, ValueError):
    """An argument lies outside the domain of a function."""


class InfiniteMeanError(DomainError):
    """The requested quantity needs a finite mean (alpha > 1)."""


class InfiniteVarianceError(DomainError):
    """The requested quantity needs a finite variance (alpha > 2)."""


class DivergentMomentError(DomainError):
    """A moment or transform required by a kernel does not exist."""


class AdmissibilityError(TailRiskError, ValueError):
    """The Sarmanov weight is negative somewhere on the support."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InsufficientExceedancesError(TailRiskError, RuntimeError):
    """Too few tail observations for a conditional estimator."""
