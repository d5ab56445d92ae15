"""Exception hierarchy shared by the geometry, measure and solver modules."""


class LogMinkowskiError(Exception):
    pass


# geometry -----------------------------------------------------------------

class GeometryError(LogMinkowskiError):
    pass


class UnboundedBody(GeometryError):
    """The (evenly extended) directions do not span the ambient space."""


class DegenerateBody(GeometryError):
    pass


class OriginNotInterior(GeometryError):
    pass


class SingularMap(GeometryError):
    pass


class ZeroDirection(GeometryError):
    pass


class NotComplementary(GeometryError):
    pass


class LiftDegenerate(GeometryError):
    pass


# measures -----------------------------------------------------------------

class MeasureError(LogMinkowskiError):
    pass


class ZeroMass(MeasureError):
    pass


class ZeroVector(MeasureError):
    pass


class EmptyMeasure(MeasureError):
    pass


class VectorOutsideSubspace(MeasureError):
    pass


class PreconditionViolated(MeasureError):
    pass


# solver -------------------------------------------------------------------

class SolverError(LogMinkowskiError):
    pass


class ConditionViolated(SolverError):
    """The target measure fails the subspace concentration condition.

    ``witness`` is the offending :class:`~logminkowski.geometry.Subspace`.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class DivergenceDetected(SolverError):
    """Support numbers escaped (anisotropy cap) or the iteration budget ran out.

    ``witness`` is the most concentrated subspace reported by the checker,
    offered as a hint for where mass is piling up.
    """

    def __init__(self, message, witness=None, iterations=0, ratio=None):
        super().__init__(message)
        self.witness = witness
        self.iterations = iterations
        self.ratio = ratio
