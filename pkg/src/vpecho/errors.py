"""Exception and warning types shared across the package."""


class VpechoError(Exception):
    """Base class for all package errors."""


class DivergenceError(VpechoError):
    """Laplace integral does not converge for the requested abscissa."""


class AccuracyError(VpechoError):
    """Requested tolerance is unreachable with the given quadrature."""


class ContourUnsafeError(VpechoError):
    """Dispersion symbol gets too close to zero on or inside the contour strip."""


class IterationInstabilityError(VpechoError):
    """Volterra forward substitution grew beyond the safety bound (dt too large)."""


class GridMismatchError(VpechoError):
    """Sampled history does not live on the expected grid."""


class GridCoverageError(VpechoError):
    """Spectral grid does not cover the support of the requested initial data."""


class BoundViolationError(VpechoError):
    """Initial-data coefficients exceed the admissible envelope."""


class IncompleteLayerError(VpechoError):
    """A lower layer required by the requested operation has not been built."""


class StabilityGuardError(VpechoError):
    """Time step violates the stability guard of the split-step integrator."""


class InsufficientWindowError(VpechoError):
    """Fit window contains too few samples."""


class ConfigError(VpechoError):
    """Configuration file is invalid; message names the offending field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config field '{field}': {message}")


class ResolutionWarning(UserWarning):
    """Adjacent grid samples differ by more than the requested tolerance."""


class InterpolationRangeWarning(UserWarning):
    """Shifted evaluation points left the sampled range and were treated as zero."""
