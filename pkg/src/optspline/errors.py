"""Exception hierarchy.

Every numerical failure derives from :class:`NumericalError` so the CLI can
map the whole family onto one exit code.
"""


class OptsplineError(Exception):
    """Base class for all package errors."""


class NumericalError(OptsplineError):
    """A computation could not be carried out to the requested accuracy."""


class NotProper(NumericalError):
    """Sequence has a z-transform zero on (or too close to) the unit circle."""


class NotInvertible(NumericalError):
    """Sequence has no bounded two-sided inverse."""


class TruncationBudgetExceeded(NumericalError):
    """Inverse decays too slowly to be truncated within the allowed width."""


class DegreeTooLarge(NumericalError):
    """Spline degree above the supported cap."""


class NotPositiveDefinite(NumericalError):
    """Toeplitz matrix of the design system is not positive definite."""

    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class DegenerateSignal(NumericalError):
    """Reference samples carry no energy."""


class GridMisaligned(OptsplineError):
    """Fine grid does not contain the integer lattice it is combined with."""


class GridMismatch(OptsplineError):
    """Two sampled functions do not share a grid."""


class DimensionMismatch(OptsplineError):
    """Two images do not have the same shape."""


class ImageTooSmall(OptsplineError):
    """Image too small for the requested operation."""


class InfeasiblePerturbation(OptsplineError):
    """Perturbation does not vanish on the integer lattice."""


class ImageFormatError(OptsplineError, ValueError):
    """Image file is malformed or of an unsupported kind."""
