"""Exception types raised across the package."""

from __future__ import annotations


class KdivisError(Exception):
    """Base class for all package-specific errors."""


class NotHermitian(KdivisError):
    """An operator failed its Hermiticity check."""


class SingularMap(KdivisError):
    """A superoperator is not invertible under the active condition threshold.

    For time-local propagators this signals a physically meaningful zero of
    the map (e.g. the coherence amplitude of strong-coupling amplitude
    damping vanishing), never a silent fallback to a pseudo-inverse.
    """

    def __init__(self, message: str, cond: float | None = None):
        super().__init__(message)
        self.cond = cond


class QuadratureFailure(KdivisError):
    """Adaptive integration of a rate function did not converge."""


class IntegrationUnstable(KdivisError):
    """Halving the RK4 step changed the propagator beyond tolerance."""


class AllStepsSingular(KdivisError):
    """Every complement step over the horizon failed; nothing to classify."""
