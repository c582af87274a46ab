"""Planar primitives: points, boundary elements and the union members of a domain.

Every distance and membership routine accepts a point array of shape
``(N, 2)`` and returns an array of shape ``(N,)`` so that grids, quadrature
and rasters evaluate the boundary in one numpy pass per element.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np

from geometry.exceptions import InvalidDomain, InvalidParams


TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidParams('point coordinates must be finite', x=self.x, y=self.y)

    def asTuple(self) -> Tuple[float, float]:
        return (self.x, self.y)

    def asArray(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    def distanceTo(self, other: 'Point') -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    @classmethod
    def fromSequence(cls, values) -> 'Point':
        return cls(float(values[0]), float(values[1]))

    def __str__(self):
        return f'({self.x:.6g}, {self.y:.6g})'


def as_points_array(points) -> np.ndarray:
    array = np.asarray(points, dtype=float)
    return array.reshape(-1, 2)


# ---------------------------------------------------------------------------
# Boundary elements
# ---------------------------------------------------------------------------

class BoundaryElement:
    kind = 'abstract'

    def distances(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def nearestPoint(self, p: Point) -> Point:
        raise NotImplementedError

    def midpoint(self) -> Point:
        raise NotImplementedError

    def samplePoints(self, step: float, box=None) -> np.ndarray:
        raise NotImplementedError

    def toRecord(self) -> Dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class SegmentElement(BoundaryElement):
    a: Point
    b: Point
    kind = 'segment'

    def __post_init__(self):
        if self.a == self.b:
            raise InvalidDomain('segment endpoints must be distinct', a=str(self.a))

    def _projection(self, points: np.ndarray) -> np.ndarray:
        start = self.a.asArray()
        direction = self.b.asArray() - start
        weight = np.dot(points - start, direction) / np.dot(direction, direction)
        weight = np.clip(weight, 0.0, 1.0)
        return start + weight[:, None] * direction

    def distances(self, points: np.ndarray) -> np.ndarray:
        return np.linalg.norm(points - self._projection(points), axis=1)

    def nearestPoint(self, p: Point) -> Point:
        return Point.fromSequence(self._projection(p.asArray()[None, :])[0])

    def midpoint(self) -> Point:
        return Point(0.5 * (self.a.x + self.b.x), 0.5 * (self.a.y + self.b.y))

    def length(self) -> float:
        return self.a.distanceTo(self.b)

    def samplePoints(self, step: float, box=None) -> np.ndarray:
        count = max(2, int(math.ceil(self.length() / step)) + 1)
        weights = np.linspace(0.0, 1.0, count)[:, None]
        return self.a.asArray() + weights * (self.b.asArray() - self.a.asArray())

    def toRecord(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'a': list(self.a.asTuple()), 'b': list(self.b.asTuple())}


@dataclass(frozen=True)
class ArcElement(BoundaryElement):
    """Circular arc swept from ``start_angle`` to ``end_angle``.

    Counterclockwise arcs sweep by increasing angle, clockwise arcs by
    decreasing angle. Equal start and end angles denote the full circle.
    """

    center: Point
    radius: float
    start_angle: float
    end_angle: float
    ccw: bool = True
    kind = 'arc'

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidDomain('arc radius must be positive', radius=self.radius)

    @property
    def sweep(self) -> float:
        if self.ccw:
            span = (self.end_angle - self.start_angle) % TWO_PI
        else:
            span = (self.start_angle - self.end_angle) % TWO_PI
        return TWO_PI if span < 1e-12 else span

    def _angleOffsets(self, angles: np.ndarray) -> np.ndarray:
        if self.ccw:
            return np.mod(angles - self.start_angle, TWO_PI)
        return np.mod(self.start_angle - angles, TWO_PI)

    def _pointAt(self, angle: float) -> np.ndarray:
        return np.array([
            self.center.x + self.radius * math.cos(angle),
            self.center.y + self.radius * math.sin(angle),
        ])

    def endpoints(self) -> Tuple[np.ndarray, np.ndarray]:
        return self._pointAt(self.start_angle), self._pointAt(self.end_angle)

    def distances(self, points: np.ndarray) -> np.ndarray:
        offsets = points - self.center.asArray()
        radial = np.hypot(offsets[:, 0], offsets[:, 1])
        onCircle = np.abs(radial - self.radius)
        if self.sweep >= TWO_PI - 1e-12:
            return onCircle
        angles = np.arctan2(offsets[:, 1], offsets[:, 0])
        within = self._angleOffsets(angles) <= self.sweep
        first, last = self.endpoints()
        toEnds = np.minimum(
            np.linalg.norm(points - first, axis=1),
            np.linalg.norm(points - last, axis=1),
        )
        return np.where(within, onCircle, toEnds)

    def nearestPoint(self, p: Point) -> Point:
        dx, dy = p.x - self.center.x, p.y - self.center.y
        angle = math.atan2(dy, dx)
        withinSweep = self.sweep >= TWO_PI - 1e-12 or \
            float(self._angleOffsets(np.array([angle]))[0]) <= self.sweep
        if withinSweep:
            return Point.fromSequence(self._pointAt(angle))
        first, last = self.endpoints()
        here = p.asArray()
        if np.linalg.norm(here - first) <= np.linalg.norm(here - last):
            return Point.fromSequence(first)
        return Point.fromSequence(last)

    def midpoint(self) -> Point:
        direction = 1.0 if self.ccw else -1.0
        return Point.fromSequence(self._pointAt(self.start_angle + direction * 0.5 * self.sweep))

    def samplePoints(self, step: float, box=None) -> np.ndarray:
        count = max(3, int(math.ceil(self.radius * self.sweep / step)) + 1)
        direction = 1.0 if self.ccw else -1.0
        angles = self.start_angle + direction * np.linspace(0.0, self.sweep, count)
        return np.column_stack([
            self.center.x + self.radius * np.cos(angles),
            self.center.y + self.radius * np.sin(angles),
        ])

    def toRecord(self) -> Dict[str, Any]:
        return {
            'kind': self.kind,
            'center': list(self.center.asTuple()),
            'radius': self.radius,
            'start_angle': self.start_angle,
            'end_angle': self.end_angle,
            'ccw': self.ccw,
        }


@dataclass(frozen=True)
class LineElement(BoundaryElement):
    """Full straight line through ``point`` along ``direction``."""

    point: Point
    direction: Point
    kind = 'line'

    def __post_init__(self):
        if self.direction.x == 0 and self.direction.y == 0:
            raise InvalidDomain('line direction must be nonzero')

    def _unit(self) -> np.ndarray:
        vector = self.direction.asArray()
        return vector / np.linalg.norm(vector)

    def distances(self, points: np.ndarray) -> np.ndarray:
        unit = self._unit()
        offsets = points - self.point.asArray()
        return np.abs(offsets[:, 0] * unit[1] - offsets[:, 1] * unit[0])

    def nearestPoint(self, p: Point) -> Point:
        unit = self._unit()
        origin = self.point.asArray()
        along = float(np.dot(p.asArray() - origin, unit))
        return Point.fromSequence(origin + along * unit)

    def midpoint(self) -> Point:
        return self.point

    def samplePoints(self, step: float, box=None) -> np.ndarray:
        unit = self._unit()
        origin = self.point.asArray()
        reach = 1.0 if box is None else box.diagonal()
        centerOffset = 0.0 if box is None else float(np.dot(box.center().asArray() - origin, unit))
        count = max(2, int(math.ceil(2.0 * reach / step)) + 1)
        along = centerOffset + np.linspace(-reach, reach, count)
        return origin + along[:, None] * unit

    def toRecord(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'point': list(self.point.asTuple()),
                'direction': list(self.direction.asTuple())}


@dataclass(frozen=True)
class PunctureElement(BoundaryElement):
    """An isolated boundary point, as in the punctured plane."""

    point: Point
    kind = 'puncture'

    def distances(self, points: np.ndarray) -> np.ndarray:
        return np.linalg.norm(points - self.point.asArray(), axis=1)

    def nearestPoint(self, p: Point) -> Point:
        return self.point

    def midpoint(self) -> Point:
        return self.point

    def samplePoints(self, step: float, box=None) -> np.ndarray:
        return self.point.asArray()[None, :]

    def toRecord(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'point': list(self.point.asTuple())}


# ---------------------------------------------------------------------------
# Union members (closed point sets)
# ---------------------------------------------------------------------------

class Primitive:
    kind = 'abstract'

    def contains(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def toRecord(self) -> Dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class Rectangle(Primitive):
    xmin: float
    xmax: float
    ymin: float
    ymax: float
    kind = 'rectangle'

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise InvalidDomain('rectangle must have positive extent')

    def contains(self, points: np.ndarray) -> np.ndarray:
        return ((points[:, 0] >= self.xmin) & (points[:, 0] <= self.xmax)
                & (points[:, 1] >= self.ymin) & (points[:, 1] <= self.ymax))

    def toRecord(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'xmin': self.xmin, 'xmax': self.xmax,
                'ymin': self.ymin, 'ymax': self.ymax}


@dataclass(frozen=True)
class Disc(Primitive):
    center: Point
    radius: float
    kind = 'disc'

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidDomain('disc radius must be positive')

    def contains(self, points: np.ndarray) -> np.ndarray:
        return np.linalg.norm(points - self.center.asArray(), axis=1) <= self.radius

    def toRecord(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'center': list(self.center.asTuple()), 'radius': self.radius}


@dataclass(frozen=True)
class SemiDisc(Primitive):
    """Half of a disc on the side of ``normal``, closed along its diameter."""

    center: Point
    radius: float
    normal: Point = Point(0.0, 1.0)
    kind = 'semidisc'

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidDomain('semi-disc radius must be positive')

    def contains(self, points: np.ndarray) -> np.ndarray:
        offsets = points - self.center.asArray()
        return ((np.hypot(offsets[:, 0], offsets[:, 1]) <= self.radius)
                & (offsets @ self.normal.asArray() >= 0.0))

    def toRecord(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'center': list(self.center.asTuple()), 'radius': self.radius,
                'normal': list(self.normal.asTuple())}


@dataclass(frozen=True)
class ConvexPolygon(Primitive):
    vertices: Tuple[Point, ...]
    kind = 'polygon'

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise InvalidDomain('polygon needs at least three vertices')

    def contains(self, points: np.ndarray) -> np.ndarray:
        corners = np.array([vertex.asTuple() for vertex in self.vertices])
        edges = np.roll(corners, -1, axis=0) - corners
        signedArea = 0.5 * np.sum(corners[:, 0] * np.roll(corners[:, 1], -1)
                                  - np.roll(corners[:, 0], -1) * corners[:, 1])
        orientation = 1.0 if signedArea > 0 else -1.0
        inside = np.ones(len(points), dtype=bool)
        for corner, edge in zip(corners, edges):
            offsets = points - corner
            cross = edge[0] * offsets[:, 1] - edge[1] * offsets[:, 0]
            inside &= orientation * cross >= 0.0
        return inside

    def toRecord(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'vertices': [list(vertex.asTuple()) for vertex in self.vertices]}


@dataclass(frozen=True)
class HalfPlane(Primitive):
    """Closed half-plane ``(p - point) . normal >= 0``."""

    point: Point
    normal: Point
    kind = 'halfplane'

    def contains(self, points: np.ndarray) -> np.ndarray:
        return (points - self.point.asArray()) @ self.normal.asArray() >= 0.0

    def toRecord(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'point': list(self.point.asTuple()),
                'normal': list(self.normal.asTuple())}


@dataclass(frozen=True)
class WholePlane(Primitive):
    kind = 'plane'

    def contains(self, points: np.ndarray) -> np.ndarray:
        return np.ones(len(points), dtype=bool)

    def toRecord(self) -> Dict[str, Any]:
        return {'kind': self.kind}


@dataclass(frozen=True)
class Box:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise InvalidDomain('box must have positive extent')

    def diagonal(self) -> float:
        return math.hypot(self.xmax - self.xmin, self.ymax - self.ymin)

    def center(self) -> Point:
        return Point(0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))

    def inflated(self, margin: float) -> 'Box':
        return Box(self.xmin - margin, self.xmax + margin, self.ymin - margin, self.ymax + margin)

    def contains(self, points: np.ndarray) -> np.ndarray:
        return ((points[:, 0] >= self.xmin) & (points[:, 0] <= self.xmax)
                & (points[:, 1] >= self.ymin) & (points[:, 1] <= self.ymax))

    def toRecord(self) -> Dict[str, Any]:
        return {'xmin': self.xmin, 'xmax': self.xmax, 'ymin': self.ymin, 'ymax': self.ymax}


Segment = SegmentElement
Arc = ArcElement
