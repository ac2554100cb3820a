"""Exception hierarchy shared across the package."""


class SaddleBenchError(Exception):
    """Base class for all package errors."""


class InvalidInputError(SaddleBenchError, ValueError):
    """Malformed input: bad shapes, non-finite entries, out-of-range parameters."""


class UnsupportedSizeError(SaddleBenchError):
    """Game too large for the exact equilibrium oracle."""


class SolverFailureError(SaddleBenchError):
    """No candidate support produced a valid equilibrium."""


class StepSizeTooLargeError(SaddleBenchError):
    """Multiplicative updates overflowed; ``t`` is the offending iteration."""

    def __init__(self, t: int, message: str | None = None):
        self.t = t
        super().__init__(message or f"exponential overflow at iteration {t}; reduce eta")


class InvariantViolation(SaddleBenchError):
    """An internal consistency check failed (e.g. reduced-system residuals)."""
