"""Exception types shared across the package."""


class RhmodError(Exception):
    """Base class for all package errors."""


class CutContactError(RhmodError):
    """Evaluation point lies on a branch cut without a resolving side tag."""


class SingularPointError(RhmodError):
    """Evaluation at a genuine singularity (e.g. the z*ln z point mu/2)."""


class ContourError(RhmodError):
    """Contour construction failed (self-intersection, cut collision, ...)."""


class PlacementError(RhmodError):
    """Integral or evaluation point violates its required loop placement."""


class QuadratureError(RhmodError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, worst_panel=None, error_estimate=None):
        super().__init__(message)
        self.worst_panel = worst_panel
        self.error_estimate = error_estimate


class ConvergenceError(RhmodError):
    """Newton iteration diverged or exhausted its budget."""


class NearBreakError(RhmodError):
    """A degeneracy floor was hit: the configuration is near a breaking curve."""


class RealnessError(RhmodError):
    """A constant that must be real carried a too-large imaginary residue."""


class ConfigError(RhmodError):
    """Malformed run configuration."""
