"""Exception hierarchy shared by all modules."""


class JuliaShapesError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(JuliaShapesError):
    """Malformed or invalid shape input."""


class AmbiguousBoundary(ShapeError):
    """A query point lies within tolerance of a boundary curve."""


class NumericalError(JuliaShapesError):
    """A numerical stage failed (CLI exit code 2)."""


class InvalidResolution(NumericalError):
    pass


class SingularSystem(NumericalError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class NegativeDensity(NumericalError):
    pass


class TooCloseToBoundary(NumericalError):
    pass


class TooFewRoots(JuliaShapesError):
    """Fewer roots requested than there are curves."""


class DegreeTooLarge(JuliaShapesError):
    pass


class EmptyMask(NumericalError):
    pass


class GridError(JuliaShapesError):
    """Viewport/grid configuration does not satisfy its invariants."""


class ExhaustedScan(JuliaShapesError):
    """No (delta, n) pair in a convergence scan met the requested tolerance."""
