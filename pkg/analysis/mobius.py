"""Fractional linear maps between discs and half-planes, and their measured
distortion of j and k."""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from geometry.domain import Domain
from geometry.exceptions import InvalidParams, QhGeoError, SingularMap
from geometry.primitives import ArcElement, Box, LineElement, Point
from domains.catalog import build_disc, build_half_plane
from metrics.batch import run_pool
from metrics.estimators import SMALL_RATIO, j_metric, k_metric
from analysis.samplers import make_rng, sample_pairs

logger = logging.getLogger(__name__)

POLE_CLEARANCE = 1e-9
COLLINEAR_TOLERANCE = 1e-9
IMAGE_LIMIT = 20.0

CAYLEY = (1j, 1j, -1.0 + 0j, 1.0 + 0j)
IDENTITY = (1.0 + 0j, 0j, 0j, 1.0 + 0j)
INVERSE_CAYLEY = (1.0 + 0j, -1j, 1.0 + 0j, 1j)


def toComplex(p: Point) -> complex:
    return complex(p.x, p.y)


def toPoint(w: complex) -> Point:
    return Point(w.real, w.imag)


@dataclass(frozen=True)
class MobiusMap:
    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        if abs(self.a * self.d - self.b * self.c) < POLE_CLEARANCE:
            raise SingularMap('ad - bc vanishes', coefficients=[str(self.a), str(self.b), str(self.c), str(self.d)])

    @classmethod
    def fromCoefficients(cls, coefficients: Sequence) -> 'MobiusMap':
        if len(coefficients) != 4:
            raise InvalidParams('a Mobius map needs four coefficients')
        return cls(*(complex(value) for value in coefficients))

    def isFinite(self, z: complex) -> bool:
        return abs(self.c * z + self.d) > POLE_CLEARANCE

    def __call__(self, p: Point) -> Point:
        z = toComplex(p)
        if not self.isFinite(z):
            raise SingularMap(f'{p} is the pole of the map')
        return toPoint((self.a * z + self.b) / (self.c * z + self.d))


def boundaryAnchors(d: Domain, f: MobiusMap) -> Tuple[Point, Point, Point]:
    element = d.boundary[0]
    for offset in np.linspace(0.1, 1.0, 10):
        if isinstance(element, ArcElement):
            angles = offset + np.array([0.0, 2.0, 4.0]) * math.pi / 3.0
            anchors = [Point(element.center.x + element.radius * math.cos(angle),
                             element.center.y + element.radius * math.sin(angle)) for angle in angles]
        else:
            anchors = [Point(element.point.x + step * element.direction.x,
                             element.point.y + step * element.direction.y) for step in (-offset, 0.5 * offset, 2.0)]
        if all(f.isFinite(toComplex(p)) for p in anchors):
            return tuple(anchors)
    raise SingularMap('could not place boundary anchors away from the pole')


def interiorReference(d: Domain, f: MobiusMap) -> Point:
    element = d.boundary[0]
    if isinstance(element, ArcElement):
        candidates = [element.center, Point(element.center.x + 0.5 * element.radius, element.center.y)]
    else:
        base = element.point
        normal = d.primitives[0].normal
        candidates = [Point(base.x + normal.x, base.y + normal.y), Point(base.x + 2 * normal.x, base.y + 2 * normal.y)]
    for candidate in candidates:
        if f.isFinite(toComplex(candidate)):
            return candidate
    raise SingularMap('every interior reference point is a pole')


def circleThrough(p: Point, q: Point, r: Point) -> Optional[Tuple[Point, float]]:
    """Circumcircle of three points, or None when they are collinear."""
    ax, ay = p.x, p.y
    bx, by = q.x, q.y
    cx, cy = r.x, r.y
    det = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    scale = max(p.distanceTo(q), q.distanceTo(r), r.distanceTo(p)) ** 2
    if abs(det) <= COLLINEAR_TOLERANCE * scale:
        return None
    ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / det
    uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / det
    center = Point(ux, uy)
    return center, center.distanceTo(p)


@dataclass(frozen=True)
class ImageShape:
    """Disc (center, radius) or half-plane (point, normal) that ``f`` maps the domain onto."""
    kind: str
    point: Point
    radius: float = 0.0
    normal: Optional[Point] = None

    def domainFor(self, x: Point, y: Point) -> Domain:
        if self.kind == 'disc':
            return build_disc(self.point, self.radius)
        middle = Point(0.5 * (x.x + y.x), 0.5 * (x.y + y.y))
        heights = [abs((p.x - self.point.x) * self.normal.x + (p.y - self.point.y) * self.normal.y) for p in (x, y)]
        half = 2.0 * (x.distanceTo(y) + max(heights))
        box = Box(middle.x - half, middle.x + half, middle.y - half, middle.y + half)
        return build_half_plane(box, self.point, self.normal)


def image_shape(d: Domain, f: MobiusMap) -> ImageShape:
    if not d.boundary or not isinstance(d.boundary[0], (ArcElement, LineElement)) or len(d.boundary) != 1:
        raise InvalidParams('Mobius checks need a disc or a half-plane', domain=d.name)
    images = [f(p) for p in boundaryAnchors(d, f)]
    inner = f(interiorReference(d, f))
    circle = circleThrough(*images)
    if circle is not None:
        center, radius = circle
        if inner.distanceTo(center) >= radius:
            raise InvalidParams('the map sends the domain outside a circle', domain=d.name)
        return ImageShape('disc', center, radius)

    first, second = images[0], images[1]
    direction = np.array([second.x - first.x, second.y - first.y])
    normal = np.array([-direction[1], direction[0]]) / np.linalg.norm(direction)
    if (inner.x - first.x) * normal[0] + (inner.y - first.y) * normal[1] < 0:
        normal = -normal
    return ImageShape('half-plane', first, normal=Point(float(normal[0]), float(normal[1])))


@dataclass(frozen=True)
class DistortionReport:
    k_distortion: float
    j_distortion: float
    samples: int
    skipped: int = 0

    def toRecord(self):
        return {'k_distortion': self.k_distortion, 'j_distortion': self.j_distortion,
                'samples': self.samples, 'skipped': self.skipped}


def spread(first: float, second: float) -> float:
    return max(first / second, second / first)


def mobius_bilipschitz_check(coefficients: Sequence, d: Domain, n_samples: int, rel_tol: Optional[float] = None,
                             seed: Optional[int] = None, threads: Optional[int] = None) -> DistortionReport:
    f = MobiusMap.fromCoefficients(coefficients)
    shape = image_shape(d, f)
    pairs = sample_pairs(d, n_samples, 'uniform', make_rng(seed))

    def measure(pair):
        x, y = pair
        try:
            fx, fy = f(x), f(y)
            if max(abs(toComplex(fx)), abs(toComplex(fy))) > IMAGE_LIMIT:
                return None
            image = shape.domainFor(fx, fy)
            if j_metric(d, x, y) < SMALL_RATIO:
                return None
            before = k_metric(d, x, y, rel_tol)
            after = k_metric(image, fx, fy, rel_tol)
            return spread(after.k_est, before.k_est), spread(after.j, before.j)
        except QhGeoError as error:
            logger.warning('skipping pair %s, %s under the map: %s', x, y, error)
            return None

    measured = [value for value in run_pool(measure, pairs, threads) if value is not None]
    if not measured:
        return DistortionReport(1.0, 1.0, 0, len(pairs))
    return DistortionReport(
        k_distortion=max(value[0] for value in measured),
        j_distortion=max(value[1] for value in measured),
        samples=len(measured),
        skipped=len(pairs) - len(measured),
    )
