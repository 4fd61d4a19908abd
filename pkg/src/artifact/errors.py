"""Shared error types.

ValueError is reserved for argument validation; everything that fails
*numerically* (iteration caps, quadrature breakdown, unsolvable nonlinear
systems) raises NumericsError so callers can map it to a distinct exit path.
"""


class NumericsError(ArithmeticError):
    """A numerical procedure failed to reach its accuracy contract.

    Carries the achieved residual (or None when no residual is meaningful).
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class PoleProximityError(NumericsError):
    """Evaluation requested too close to a pole to be meaningful."""


class SolvabilityError(NumericsError):
    """No admissible solution of a nonlinear system at the requested point."""


class AccuracyWarning(UserWarning):
    """Result returned, but an internal monitor flags degraded accuracy."""
