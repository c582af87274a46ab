"""Continuous smoothing of graph geodesics.

A graph path is resampled evenly in quasihyperbolic arclength and its
interior vertices are moved by L-BFGS-B to minimize the quadrature length,
each vertex boxed inside half of its boundary-distance ball.
"""

import logging
import math
from typing import List, Tuple

import numpy as np
from scipy import optimize

from geometry.domain import Domain
from geometry.paths import PolyPath
from geometry.primitives import Point
from qhgrid.quadrature import polyline_qh_length, segment_qh_lengths

logger = logging.getLogger(__name__)

MIN_VERTICES = 12
MAX_VERTICES = 96
VERTICES_PER_UNIT = 8
RELAX_ROUNDS = 2
STEP_FRACTION = 1e-4


def sampleCount(qhLength: float) -> int:
    return int(min(MAX_VERTICES, max(MIN_VERTICES, VERTICES_PER_UNIT * round(qhLength) + 8)))


def resample_by_qh_length(domain: Domain, path: PolyPath, count: int) -> np.ndarray:
    """Vertices at equal quasihyperbolic arclength along ``path``.

    Chords that would leave the domain are replaced by the original
    polyline between their ends.
    """
    vertices = path.asArray()
    pieces = segment_qh_lengths(domain, vertices[:-1], vertices[1:])
    cumulative = np.concatenate([[0.0], np.cumsum(pieces)])
    targets = np.linspace(0.0, cumulative[-1], count)
    owners = np.clip(np.searchsorted(cumulative, targets, side='right') - 1, 0, len(pieces) - 1)
    fractions = (targets - cumulative[owners]) / np.where(pieces[owners] > 0, pieces[owners], 1.0)
    fractions = np.clip(fractions, 0.0, 1.0)
    samples = vertices[owners] + fractions[:, None] * (vertices[owners + 1] - vertices[owners])
    samples[0] = vertices[0]
    samples[-1] = vertices[-1]

    clear = domain.segmentInsideMask(samples[:-1], samples[1:])
    assembled: List[np.ndarray] = [samples[0]]
    for index in range(len(samples) - 1):
        if not clear[index]:
            assembled.extend(vertices[owners[index] + 1:owners[index + 1] + 1])
        assembled.append(samples[index + 1])
    result = [assembled[0]]
    for vertex in assembled[1:]:
        if not np.array_equal(vertex, result[-1]):
            result.append(vertex)
    return np.array(result)


class PathObjective:
    """Quadrature length of a polyline with fixed ends, with a central
    difference gradient over the interior vertices."""

    def __init__(self, domain: Domain, first: np.ndarray, last: np.ndarray, steps: np.ndarray):
        self.domain = domain
        self.first = first
        self.last = last
        self.steps = steps
        self.bestValue = math.inf
        self.bestInterior = None

    def polyline(self, interior: np.ndarray) -> np.ndarray:
        return np.vstack([self.first, interior, self.last])

    def __call__(self, flat: np.ndarray) -> Tuple[float, np.ndarray]:
        interior = flat.reshape(-1, 2)
        polyline = self.polyline(interior)
        if not self.domain.segmentInsideMask(polyline[:-1], polyline[1:]).all():
            return 2.0 * self.bestValue if math.isfinite(self.bestValue) else 1e12, np.zeros_like(flat)

        left = polyline[:-2]
        right = polyline[2:]
        starts = [polyline[:-1]]
        ends = [polyline[1:]]
        for axis in (0, 1):
            for sign in (1.0, -1.0):
                shifted = interior.copy()
                shifted[:, axis] += sign * self.steps
                starts.extend([left, shifted])
                ends.extend([shifted, right])
        values = segment_qh_lengths(self.domain, np.vstack(starts), np.vstack(ends))

        count = len(interior)
        base = values[:count + 1]
        total = math.fsum(base.tolist())
        if total < self.bestValue:
            self.bestValue = total
            self.bestInterior = interior.copy()

        local = values[count + 1:].reshape(4, 2, count).sum(axis=1)
        gradient = np.empty_like(interior)
        gradient[:, 0] = (local[0] - local[1]) / (2.0 * self.steps)
        gradient[:, 1] = (local[2] - local[3]) / (2.0 * self.steps)
        return total, gradient.ravel()


def relax_path(domain: Domain, path: PolyPath) -> Tuple[float, PolyPath]:
    """Return a shorter polygon joining the ends of ``path`` and its length."""
    if path.is_degenerate:
        return 0.0, path
    startLength = polyline_qh_length(domain, path.asArray())
    vertices = resample_by_qh_length(domain, path, sampleCount(startLength))
    if len(vertices) < 3:
        return startLength, path

    for _ in range(RELAX_ROUNDS):
        interior = vertices[1:-1]
        clearances = domain.chainDistance(interior)
        reach = clearances / (2.0 * math.sqrt(2.0))
        bounds = list(zip((interior - reach[:, None]).ravel(), (interior + reach[:, None]).ravel()))
        objective = PathObjective(domain, vertices[0], vertices[-1], STEP_FRACTION * clearances)
        optimize.minimize(objective, interior.ravel(), jac=True, method='L-BFGS-B',
                          bounds=bounds, options={'maxiter': 200})
        if objective.bestInterior is None:
            break
        vertices = objective.polyline(objective.bestInterior)

    relaxedLength = polyline_qh_length(domain, vertices)
    if relaxedLength >= startLength:
        return startLength, path
    logger.debug('relaxed path from %.6g to %.6g', startLength, relaxedLength)
    relaxed = PolyPath.fromPoints(Point(float(x), float(y)) for x, y in vertices)
    return relaxedLength, relaxed
