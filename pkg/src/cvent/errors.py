"""Exception hierarchy shared by all cvent modules."""


class CventError(Exception):
    """Base class for every error raised by cvent."""


class ValidationError(CventError, ValueError):
    """An argument lies outside its legal domain.

    ``key`` names the offending field when one is known, so the CLI can
    report it.
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class DegenerateInputError(CventError, ValueError):
    """A computation needs a strictly positive quantity that was zero."""


class GeometryError(CventError, ValueError):
    """A 2x2 covariance block is singular or not positive definite."""


class BracketError(CventError, ValueError):
    """A root-finding bracket does not contain a sign change."""


class InsufficientDataError(CventError, ValueError):
    """Too few samples for a reliable estimate."""


class InferenceError(CventError, ValueError):
    """Measured variances cannot be explained by a lossy squeezer."""


class InconsistentMeasurementError(InferenceError):
    pass


class UnphysicalSourceError(InferenceError):
    pass
