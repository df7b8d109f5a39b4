"""Exception hierarchy shared by all modules."""


class PadicError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(PadicError, ValueError):
    pass


class PrecisionError(PadicError):
    """Two numbers cannot be told apart at the precision they carry."""


class IndistinguishableError(PrecisionError):
    def __init__(self, precision, message=None):
        self.precision = precision
        super().__init__(message or f"numbers agree on all known digits (precision {precision})")


class UnsupportedOperationError(PadicError):
    pass


class NotInImageError(PadicError, ValueError):
    pass


class DegenerateError(PadicError):
    pass


class NonDiscreteError(PadicError):
    """Two hyperbolic translations do not generate a discrete group."""
