"""The distance ratio metric j, the quasihyperbolic metric k and the
quasihyperbolic length of explicit paths."""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass
from typing import Any, Dict, Optional

from django.conf import settings
from django.core.cache import caches

from geometry.domain import Domain, PointClass
from geometry.exceptions import InvalidParams, NoConvergence, PathExitsDomain, PointNotInterior
from geometry.paths import PolyPath, path_length
from geometry.primitives import Point
from qhgrid.grid import QhGrid, build_grid
from qhgrid.quadrature import polyline_qh_length
from qhgrid.refinement import refine_pair

logger = logging.getLogger(__name__)

SMALL_RATIO = 1e-6

gridLock = threading.Lock()


@dataclass(frozen=True)
class MetricSample:
    x: Point
    y: Point
    j: float
    k_est: float
    k_err: float
    ratio: float
    geodesic: PolyPath
    converged: bool = True
    level: int = 0

    @property
    def kj_ratio(self) -> Optional[float]:
        return self.k_est / self.j if self.j > 0 else None

    def toRecord(self) -> Dict[str, Any]:
        return {
            'x': list(self.x.asTuple()),
            'y': list(self.y.asTuple()),
            'j': self.j,
            'k_est': self.k_est,
            'k_err': self.k_err,
            'ratio': self.ratio,
            'converged': self.converged,
            'level': self.level,
            'geodesic': [list(vertex.asTuple()) for vertex in self.geodesic.vertices],
        }


def distance_ratio(d: Domain, x: Point, y: Point) -> float:
    """|x - y| / min(delta(x), delta(y))."""
    return x.distanceTo(y) / min(d.delta(x), d.delta(y))


def j_metric(d: Domain, x: Point, y: Point) -> float:
    return math.log1p(distance_ratio(d, x, y))


def qh_length(d: Domain, path: PolyPath, quad_pts: Optional[int] = None) -> float:
    for vertex in path.vertices:
        if d.classify(vertex) is not PointClass.INSIDE:
            raise PathExitsDomain(f'path vertex {vertex} is not inside {d.name}', vertex=list(vertex.asTuple()))
    if path.is_degenerate:
        return 0.0
    vertices = path.asArray()
    inside = d.segmentInsideMask(vertices[:-1], vertices[1:])
    if not inside.all():
        first = int((~inside).nonzero()[0][0])
        raise PathExitsDomain(f'path segment {first} leaves {d.name}', segment=first)
    return polyline_qh_length(d, vertices, quad_pts)


def base_pitch(d: Domain) -> float:
    return d.box.diagonal() / settings.QHGEO['BASE_DIVISIONS']


def base_grid(d: Domain, stencil: Optional[int] = None) -> QhGrid:
    """Graded base grid of ``d``, shared across queries through the grid cache."""
    stencil = int(stencil or settings.QHGEO['STENCIL'])
    pitch = base_pitch(d)
    key = f'grid:{d.fingerprint}:{pitch!r}:{stencil}'
    cache = caches['grids']
    grid = cache.get(key)
    if grid is not None:
        return grid
    with gridLock:
        grid = cache.get(key)
        if grid is None:
            grid = build_grid(d, pitch, stencil)
            cache.set(key, grid)
            logger.debug('cached base grid %s', key)
    return grid


def k_metric(d: Domain, x: Point, y: Point, rel_tol: Optional[float] = None,
             max_level: Optional[int] = None, strict: bool = False) -> MetricSample:
    """Estimate k_G(x, y) by grid refinement.

    A run that does not converge is returned with ``converged=False`` and
    its last successive difference as ``k_err``, unless ``strict``.
    """
    ratio = distance_ratio(d, x, y)
    j = math.log1p(ratio)
    if x == y:
        return MetricSample(x, y, 0.0, 0.0, 0.0, 0.0, PolyPath.degenerate(x))
    if ratio < SMALL_RATIO:
        return MetricSample(x, y, j, j, 0.0, ratio, PolyPath((x, y)))

    try:
        result = refine_pair(base_grid(d), x, y, rel_tol, max_level)
    except NoConvergence as error:
        if strict:
            raise
        result = error.result
    return MetricSample(
        x=x,
        y=y,
        j=j,
        k_est=result.estimate,
        k_err=result.err_est,
        ratio=ratio,
        geodesic=result.path,
        converged=result.converged,
        level=result.level,
    )


def k_oracle_halfplane(x: Point, y: Point) -> float:
    """Closed form k in the upper half-plane {y > 0}."""
    if not (x.y > 0 and y.y > 0):
        raise PointNotInterior(f'{x} or {y} is not in the upper half-plane')
    return math.acosh(1.0 + (x.distanceTo(y) ** 2) / (2.0 * x.y * y.y))


def k_oracle_punctured(x: Point, y: Point) -> float:
    """Closed form k in the plane punctured at the origin."""
    rx, ry = math.hypot(x.x, x.y), math.hypot(y.x, y.y)
    if rx == 0 or ry == 0:
        raise PointNotInterior(f'{x} or {y} is the puncture')
    theta = math.atan2(abs(x.x * y.y - x.y * y.x), x.x * y.x + x.y * y.y)
    return math.hypot(theta, math.log(rx / ry))


def quasiconvexity_ratio(path: PolyPath, x: Point, y: Point) -> float:
    """l(path) / |x - y|, the quasiconvexity constant witnessed by ``path``."""
    if x == y:
        raise InvalidParams('quasiconvexity ratio needs distinct points')
    return path_length(path) / x.distanceTo(y)


def normalized_partner(d: Domain, y: Point) -> Point:
    """The point z on the boundary normal through y with delta(z) = delta(y)/e,
    so that j(y, z) = k(y, z) = 1."""
    d.delta(y)
    nearest = d.nearestBoundaryPoint(y)
    keep = 1.0 - 1.0 / math.e
    return Point(y.x + (nearest.x - y.x) * keep, y.y + (nearest.y - y.y) * keep)
