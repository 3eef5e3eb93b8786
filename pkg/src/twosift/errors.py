"""Exception hierarchy shared by every module of the package."""


class TwoSiftError(Exception):
    """Base class for all library errors."""


class GeometryError(TwoSiftError, ValueError):
    pass


class DegenerateDepth(GeometryError):
    """A point maps to (or near) the line at infinity."""


class SingularHomography(GeometryError):
    pass


class DegenerateCloud(GeometryError):
    """All points of a cloud coincide, so no normalizing scale exists."""


class SingularJacobian(GeometryError):
    pass


class SingularAffinity(GeometryError):
    pass


class NonPositiveScale(GeometryError):
    """A Jacobian with det <= 0 cannot come from an orientation-preserving frame."""


class SolverError(TwoSiftError):
    pass


class RankDeficient(SolverError):
    pass


class DegenerateSystem(SolverError):
    """The two quadratics do not define a finite set of common roots."""


class EmptySolution(SolverError):
    pass


class DegenerateConfiguration(SolverError):
    pass


class EstimationError(TwoSiftError):
    pass


class InsufficientData(EstimationError):
    pass


class NoModelFound(EstimationError):
    pass


class DegenerateScene(TwoSiftError):
    pass


class ParseError(TwoSiftError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
