"""Exception hierarchy. Each error carries a stable machine-readable ``code``."""


class GeometryError(Exception):
    code = "geometry_error"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.code)
        self.details = details

    def to_dict(self) -> dict:
        out = {"error": self.code, "message": str(self)}
        out.update({k: v for k, v in self.details.items() if _jsonable(v)})
        return out


def _jsonable(v) -> bool:
    return isinstance(v, (int, float, str, bool, type(None), list, tuple))


# minkowski
class DegeneratePair(GeometryError):
    code = "degenerate_pair"


class OffHyperboloid(GeometryError):
    code = "off_hyperboloid"


# surface_group
class NonFuchsian(GeometryError):
    code = "non_fuchsian"


class DegenerateRepresentation(GeometryError):
    code = "degenerate_representation"


# equivariant_hull
class UncertifiedHull(GeometryError):
    code = "uncertified_hull"


class NonSpacelikeFace(GeometryError):
    code = "non_spacelike_face"


class DegenerateConfiguration(GeometryError):
    code = "degenerate_configuration"


class PositiveCurvatureVertex(GeometryError):
    code = "positive_curvature_vertex"


# gauss_cellulation
class BalanceViolation(GeometryError):
    code = "balance_violation"


class NonClosingPolygon(GeometryError):
    code = "non_closing_polygon"


class NonConvexPolygon(GeometryError):
    code = "non_convex_polygon"


# flat_cone_metric
class InvalidMetric(GeometryError):
    code = "invalid_metric"


class TriangleInequalityViolated(InvalidMetric):
    code = "triangle_inequality_violated"


class FlipLimitExceeded(GeometryError):
    code = "flip_limit_exceeded"


class CorridorEscape(GeometryError):
    code = "corridor_escape"


# rigidity
class FlatCorner(GeometryError):
    code = "flat_corner"


# realize
class NoConvergence(GeometryError):
    code = "no_convergence"


class CombinatorialChurn(GeometryError):
    code = "combinatorial_churn"


# cli
class UnknownSuite(GeometryError):
    code = "unknown_suite"
