"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A physical parameter is outside its validated domain.

    ``field`` names the offending parameter so callers (and the CLI) can
    report machine-readable validation failures.
    """

    def __init__(self, field, message):
        super().__init__(message)
        self.field = field


class QuadratureError(RuntimeError):
    """An adaptive quadrature failed to reach the requested tolerance.

    ``achieved`` carries the error estimate that was reached.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class RootRefinementError(RuntimeError):
    """Root polishing for a localized mode did not converge.

    ``bracket`` records the (lo, hi, z_lo, z_hi) state at failure.
    """

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class ConsistencyError(RuntimeError):
    """Two independent computation routes disagree beyond tolerance."""

    def __init__(self, message, discrepancy=None):
        super().__init__(message)
        self.discrepancy = discrepancy


class PhysicalityError(ValueError):
    """Gaussian-state moments violate (n + 1/2)^2 >= |sigma|^2."""


class RecurrenceWindowError(ValueError):
    """Requested times exceed the validity window of a finite discretized bath."""
