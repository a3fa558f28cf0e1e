"""Exception types shared across the package."""


class LiouvoptError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(LiouvoptError, ValueError):
    """Invalid mesh/run configuration (parity, symmetry, bad keys, ...)."""


class GridAlignmentError(ConfigError):
    """A wave-speed jump does not sit on a half-grid point / grid line."""


class DomainError(LiouvoptError, ValueError):
    """Scalar argument outside its mathematical domain."""


class StabilityError(LiouvoptError, RuntimeError):
    """Explicit time step exceeds the stability bound."""


class ConvergenceError(LiouvoptError, RuntimeError):
    """An iterative method failed to converge.

    Carries the iterate history so the caller can diagnose stagnation.
    """

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class MemoryBudgetError(LiouvoptError, RuntimeError):
    """Requested run would exceed the configured memory cap."""
