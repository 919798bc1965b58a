"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid user-supplied configuration or parameter."""


class LeakyRegimeError(ConfigError):
    """The mirror parameter tau lies outside the leaky-mirror regime tau << 1."""


class NumericalError(RuntimeError):
    """A quadrature or fit did not reach the requested accuracy."""

    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate


class FitError(NumericalError):
    """Lorentzian extraction failed (ambiguous window or divergent fit)."""


class UndefinedProfileError(ConfigError):
    """The optimal profile is undefined because F_T vanishes at its centre."""
