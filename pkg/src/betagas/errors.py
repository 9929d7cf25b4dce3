"""Exception types shared across the toolkit."""


class BetagasError(Exception):
    """Base class for all toolkit errors."""


class DomainError(BetagasError):
    """A point lies outside the domain of a potential or measure."""


class BoundaryError(BetagasError):
    """Derivative requested exactly at a piece boundary."""


class InvalidSpecError(BetagasError):
    """A construction spec violates its preconditions."""


class ConstructionError(BetagasError):
    """The critical-potential matching condition cannot be satisfied."""


class ConvergenceError(BetagasError):
    """Solver failed to converge; carries the last residuals."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class ThresholdError(BetagasError):
    """Support detection found no nodes above the threshold."""


class InconsistencyError(BetagasError):
    """Solution data contradicts itself (e.g. nonpositive density on support)."""


class ConfigError(BetagasError):
    """Invalid run configuration."""


class PreconditionError(BetagasError):
    """An experiment was invoked without its certificate."""


class SaturationError(BetagasError):
    """An exponent fit was requested on saturated frequencies."""

    def __init__(self, message, n_values=()):
        super().__init__(message)
        self.n_values = tuple(n_values)


class MarginError(BetagasError):
    """An estimator was evaluated too close to the particle region."""


class UndersampleError(BetagasError):
    """Too few effective samples for a stable estimate."""
