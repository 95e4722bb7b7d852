"""Shared exception types."""


class GasketError(Exception):
    """Base class for all library errors."""


class DegenerateTripleError(GasketError):
    """Raised when a construction needs three distinct points but got fewer."""


class IdenticalCirclesError(GasketError):
    """Raised when two input circles coincide and the operation is undefined."""


class SingularPointError(GasketError):
    """Raised when a piecewise map is evaluated at a point of its singular set."""

    def __init__(self, point, message="point lies in the singular set"):
        super().__init__(f"{message}: {point!r}")
        self.point = point


class NoConvergenceError(GasketError):
    """Raised when the packing solver fails to reach the requested residual."""

    def __init__(self, iterations: int, residual: float):
        super().__init__(
            f"no convergence after {iterations} iterations (residual {residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual


class NotInDomainError(GasketError):
    """Raised when a point lies outside the domain of the requested map."""


class ConstructionInconsistentError(GasketError):
    """Raised when a derived geometric construction fails its self-checks."""


class PrecisionUnreachableError(GasketError):
    """Raised when exact arithmetic would exceed the configured digit budget."""


class LevelTooLargeError(GasketError):
    """Raised when a Farey level beyond the supported size is requested."""


class InsufficientDataError(GasketError):
    """Raised when an estimate is requested from too few samples."""


class VerificationFailedError(GasketError):
    """Raised when a claimed numerical property fails its check."""
