from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np

from geometry.exceptions import InvalidParams, VertexNotOnPath
from geometry.primitives import Point


@dataclass(frozen=True)
class PolyPath:
    """Rectifiable path given by its ordered vertices."""

    vertices: Tuple[Point, ...]

    def __post_init__(self):
        if len(self.vertices) < 2:
            raise InvalidParams('a path needs at least two vertices')
        # a degenerate path x -> x is kept as two equal vertices
        if len(self.vertices) > 2:
            for first, second in zip(self.vertices, self.vertices[1:]):
                if first == second:
                    raise InvalidParams('consecutive path vertices must be distinct', vertex=str(first))

    @classmethod
    def fromPoints(cls, points: Iterable) -> 'PolyPath':
        vertices: List[Point] = []
        for item in points:
            vertex = item if isinstance(item, Point) else Point.fromSequence(item)
            if vertices and vertices[-1] == vertex:
                continue
            vertices.append(vertex)
        if len(vertices) == 1:
            vertices.append(vertices[0])
        return cls(tuple(vertices))

    @classmethod
    def degenerate(cls, p: Point) -> 'PolyPath':
        return cls((p, p))

    @property
    def is_degenerate(self) -> bool:
        return len(self.vertices) == 2 and self.vertices[0] == self.vertices[1]

    @property
    def start(self) -> Point:
        return self.vertices[0]

    @property
    def end(self) -> Point:
        return self.vertices[-1]

    def asArray(self) -> np.ndarray:
        return np.array([vertex.asTuple() for vertex in self.vertices], dtype=float)

    def segmentLengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.asArray(), axis=0), axis=1)

    def reversed(self) -> 'PolyPath':
        return PolyPath(tuple(reversed(self.vertices)))

    def __len__(self):
        return len(self.vertices)


def path_length(path: PolyPath) -> float:
    return math.fsum(path.segmentLengths().tolist())


def sub_path_lengths(path: PolyPath, z: Point) -> Tuple[float, float]:
    """Return the Euclidean lengths of the path before and after vertex ``z``."""
    try:
        position = path.vertices.index(z)
    except ValueError:
        raise VertexNotOnPath(f'{z} is not a vertex of the path', vertex=list(z.asTuple()))
    lengths = path.segmentLengths().tolist()
    before = math.fsum(lengths[:position])
    after = math.fsum(lengths[position:])
    return before, after


def point_at_length(path: PolyPath, target: float) -> Tuple[Point, int]:
    """Point at Euclidean arclength ``target`` from the start, with the index
    of the segment that holds it."""
    lengths = path.segmentLengths()
    travelled = 0.0
    for index, length in enumerate(lengths):
        if travelled + length >= target and length > 0:
            weight = (target - travelled) / length
            a = path.vertices[index]
            b = path.vertices[index + 1]
            return Point(a.x + weight * (b.x - a.x), a.y + weight * (b.y - a.y)), index
        travelled += length
    return path.end, len(lengths) - 1
