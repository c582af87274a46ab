"""Level-by-level refinement of a grid around one pair of points.

Level 0 refines the base grid inside the region where a geodesic of
quasihyperbolic length at most ``budget`` can run: a cell is kept only if
j(x, c) + j(c, y) can stay below the budget for some c in it. Each later
level halves the grading inside a tube around the best path found so far.
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from django.conf import settings

from geometry.domain import Domain
from geometry.exceptions import Disconnected, InvalidParams, NoConvergence
from geometry.paths import PolyPath
from geometry.primitives import Point, SegmentElement
from qhgrid.grid import QhGrid, Region, carry_path, inject_points, refine_grid, shortest_path
from qhgrid.relax import relax_path

logger = logging.getLogger(__name__)

FOCUS_ATTEMPTS = 5
TUBE_WIDTH = 2.0


@dataclass(frozen=True)
class RefinementResult:
    estimate: float
    path: PolyPath
    err_est: float
    level: int
    history: Tuple[float, ...]
    converged: bool = True

    def asTriple(self) -> Tuple[float, PolyPath, float]:
        return self.estimate, self.path, self.err_est


def focus_region(points: Sequence[Point], deltas: Sequence[float], budget: float) -> Region:
    anchors = [p.asArray() for p in points]

    def region(centers, radii, clearances):
        total = np.zeros(len(centers))
        for anchor, delta in zip(anchors, deltas):
            gap = np.maximum(np.linalg.norm(centers - anchor, axis=1) - radii, 0.0)
            total += np.log1p(gap / np.minimum(delta, clearances + radii))
        return total <= budget

    return region


def tube_region(path: PolyPath, width: float) -> Region:
    """Cells within ``width`` times their own boundary distance of ``path``."""
    vertices = path.vertices
    pieces = [SegmentElement(a, b) for a, b in zip(vertices, vertices[1:]) if a != b]

    def region(centers, radii, clearances):
        nearest = np.full(len(centers), np.inf)
        if not pieces:
            nearest = np.linalg.norm(centers - vertices[0].asArray(), axis=1)
        for piece in pieces:
            np.minimum(nearest, piece.distances(centers), out=nearest)
        return nearest - radii <= width * (clearances + radii)

    return region


def shorterOf(domain: Domain, path: PolyPath) -> Tuple[float, PolyPath]:
    """Quadrature length of ``path`` or of its relaxation, whichever is shorter."""
    return relax_path(domain, path)


def focusedSearch(g: QhGrid, x: Point, y: Point, deltas, floor: float, rho: float, budget: float):
    for attempt in range(FOCUS_ATTEMPTS):
        region = focus_region((x, y), deltas, budget)
        focused = inject_points(refine_grid(g, region, rho, floor, level=0), (x, y))
        try:
            weight, path = shortest_path(focused, x, y)
        except Disconnected:
            if attempt == FOCUS_ATTEMPTS - 1:
                raise
            budget *= 2.0
            logger.debug('focus region disconnected, widening budget to %.6g', budget)
            continue
        if weight <= budget:
            return focused, weight, path
        budget = 1.25 * weight
        logger.debug('geodesic longer than the focus budget, widening to %.6g', budget)
    return focused, weight, path


def refine_pair(g: QhGrid, x: Point, y: Point, rel_tol: float = None, max_level: int = None) -> RefinementResult:
    rel_tol = settings.QHGEO['REL_TOL'] if rel_tol is None else rel_tol
    max_level = settings.QHGEO['MAX_LEVEL'] if max_level is None else max_level
    if not rel_tol > 0:
        raise InvalidParams('rel_tol must be positive', rel_tol=rel_tol)
    domain = g.domain
    deltas = (domain.delta(x), domain.delta(y))
    if x == y:
        return RefinementResult(0.0, PolyPath.degenerate(x), 0.0, 0, (0.0,))

    floor = min(deltas)
    rho = settings.QHGEO['GRADING']
    j = math.log1p(x.distanceTo(y) / floor)
    grid, _, path = focusedSearch(g, x, y, deltas, floor, rho, max(3.0 * j, j + 3.0))
    best, bestPath = shorterOf(domain, path)
    history = [best]
    logger.info('level 0 estimate %.6g for %s -> %s in %s', best, x, y, domain.name)

    err = None
    for level in range(1, max_level + 1):
        scale = 2.0 ** level
        region = tube_region(bestPath, TUBE_WIDTH * 2.0 / scale)
        grid = refine_grid(grid, region, rho / scale, floor / scale, level)
        # the previous best path stays in the graph; history is nonincreasing
        _, path = shortest_path(carry_path(grid, bestPath), x, y)
        estimate, candidate = shorterOf(domain, path)
        history.append(estimate)
        err = abs(best - estimate)
        best, bestPath = estimate, candidate
        logger.info('level %d estimate %.6g (difference %.3g, %d nodes)', level, estimate, err, grid.node_count)
        if err <= rel_tol * best:
            return RefinementResult(best, bestPath, err, level, tuple(history))

    logger.warning('no convergence for %s -> %s in %s after %d levels', x, y, domain.name, max_level)
    error = NoConvergence(f'refinement did not reach rel_tol {rel_tol:g}', estimate=best, err_est=err,
                          level=max_level)
    error.result = RefinementResult(best, bestPath, err if err is not None else math.inf, max_level,
                                    tuple(history), converged=False)
    raise error


def refine_until(g: QhGrid, x: Point, y: Point, rel_tol: float = None,
                 max_level: int = None) -> Tuple[float, PolyPath, float]:
    return refine_pair(g, x, y, rel_tol, max_level).asTriple()
