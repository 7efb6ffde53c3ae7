"""Exception types raised by the evaluators."""


class PriorError(Exception):
    """Base class for all errors raised by :mod:`bnnprior`."""


class DomainError(PriorError, ValueError):
    """Argument outside the domain of a function (e.g. ``log_gamma(-1)``)."""


class PoleError(DomainError):
    """Argument sits on a pole of the Gamma function."""


class ConfigurationError(PriorError, ValueError):
    """Invalid numerical configuration (contour placement, grids, ...)."""


class DivergenceError(PriorError, ArithmeticError):
    """The quantity is infinite at the requested point.

    Raised for densities at the origin when some hidden width does not
    exceed the output width, where the density has an integrable
    singularity.
    """

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class AccuracyError(PriorError, ArithmeticError):
    """The requested tolerance could not be met.

    ``best_estimate`` carries the last value computed and ``error_estimate``
    the achieved error bound, so callers can decide whether to keep it.
    """

    def __init__(self, message, best_estimate=None, error_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


class IntegrabilityError(AccuracyError):
    """An integral transform did not converge (integrand does not decay)."""


class ResourceError(PriorError, MemoryError):
    """Request would exceed the configured memory budget."""


class DegenerateHistogramError(PriorError, ValueError):
    """No samples left to histogram after excluding the atom at zero."""
