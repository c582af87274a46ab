from typing import Any, Dict, Optional


class QhGeoError(Exception):
    """Base class for every failure raised by the toolkit."""

    code = 'qhgeo_error'

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.details = details

    def asRecord(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {'error': self.code, 'detail': str(self)}
        for key, value in self.details.items():
            record[key] = value
        return record


class PointNotInterior(QhGeoError):
    code = 'point_not_interior'


class VertexNotOnPath(QhGeoError):
    code = 'vertex_not_on_path'


class InvalidDomain(QhGeoError):
    code = 'invalid_domain'


class BadTruncation(QhGeoError):
    code = 'bad_truncation'


class InvalidParams(QhGeoError):
    code = 'invalid_params'


class EmptyGrid(QhGeoError):
    code = 'empty_grid'


class PointNotInjected(QhGeoError):
    code = 'point_not_injected'


class Disconnected(QhGeoError):
    code = 'disconnected'


class NoConvergence(QhGeoError):
    code = 'no_convergence'

    def __init__(self, message: str, estimate: Optional[float] = None,
                 err_est: Optional[float] = None, **details: Any):
        super().__init__(message, estimate=estimate, err_est=err_est, **details)
        self.estimate = estimate
        self.err_est = err_est


class PathExitsDomain(QhGeoError):
    code = 'path_exits_domain'


class SingularMap(QhGeoError):
    code = 'singular_map'


class BoundViolation(QhGeoError):
    code = 'bound_violation'


# errors that stem from numerics rather than from bad input
COMPUTATION_ERRORS = (Disconnected, NoConvergence, EmptyGrid, BoundViolation, PathExitsDomain)
