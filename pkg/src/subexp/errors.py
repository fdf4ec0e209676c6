"""Exception hierarchy shared by every module of the package."""


class SubexpError(Exception):
    """Base class for all library errors."""


class DomainError(SubexpError, ValueError):
    """An argument lies outside the domain of the requested function."""


class ConfigurationError(SubexpError, ValueError):
    """A grid, scheme or model parameter set is unusable as configured."""


class UnsupportedRegimeError(SubexpError):
    """No closed-form expansion is available for these parameters."""


class NumericalError(SubexpError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance.

    ``estimate`` carries the last error estimate (or residual) when known.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class SingularityError(NumericalError):
    """The implicit derivative formula for psi has a vanishing denominator."""


class StatisticalPowerError(SubexpError):
    """Too few observations to support the requested estimate."""


class ResourceError(SubexpError):
    """A simulation would exceed its configured work budget."""
