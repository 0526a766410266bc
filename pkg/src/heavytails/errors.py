"""Exception types shared across the package."""


class HeavyTailsError(Exception):
    """Base class for model-level errors."""


class ParameterError(HeavyTailsError, ValueError):
    """A distribution or model parameter is outside its admissible domain."""


class ConfigError(HeavyTailsError, ValueError):
    """An experiment configuration is inconsistent or incomplete."""


class SingularSeriesError(HeavyTailsError, ZeroDivisionError):
    """Reciprocal of a power series whose constant term vanishes."""


class InsufficientDataError(HeavyTailsError, ValueError):
    """Not enough observations to run an estimator."""


class NonPowerLawError(HeavyTailsError, ValueError):
    """Sample shows a non-power-law signature; tail fit rejected."""


class NoStationarySolutionError(HeavyTailsError, ArithmeticError):
    """Second-moment recursion has no stationary solution (amplification too strong)."""


class NoFrontierError(HeavyTailsError, ArithmeticError):
    """Deadline law has no finite mean, so the heavy-traffic frontier is undefined."""


class NumericError(HeavyTailsError, ArithmeticError):
    """A quadrature or root-finder failed to reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class RunawayError(HeavyTailsError, RuntimeError):
    """A relaxation loop exceeded its hard iteration cap (bug trap)."""
