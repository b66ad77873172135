"""Exception hierarchy shared by all qlz modules."""


class QLZError(Exception):
    """Base class for every error raised by qlz."""


class EmptyShell(QLZError):
    """No sample landed in the requested energy shell within budget."""


class ResolutionTooCoarse(QLZError):
    """A grid or time window cannot resolve the requested regularization."""


class StepTooLarge(QLZError):
    """Split-step time step violates the accuracy guard."""


class OrderTooHigh(QLZError):
    """Requested Duhamel order is beyond the supported range."""


class GridMismatch(QLZError):
    """Two fields or kernels live on incompatible grids."""


class CutoffTooShort(QLZError):
    """Autocorrelation time cutoff is too short to have converged."""


class NotPSD(QLZError):
    """Matrix is not positive semidefinite."""


class KTooLarge(QLZError):
    """Collision order exceeds what the routine enumerates."""


class SizeTooLargeForExhaustive(QLZError):
    """Matrix too large for exhaustive subdeterminant enumeration."""


class QuadratureDivergence(QLZError):
    """A quadrature's error estimate exceeds the requested tolerance."""


class ConfigInvalid(QLZError):
    """Experiment configuration failed validation.

    ``field`` names the offending key when there is one.
    """

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field
