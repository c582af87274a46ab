"""Domains as unions of primitives with an explicit boundary chain."""

from __future__ import annotations

import enum
import hashlib
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np
from django.conf import settings

from geometry.exceptions import InvalidDomain, PointNotInterior
from geometry.primitives import (
    BoundaryElement,
    Box,
    Point,
    Primitive,
    PunctureElement,
    as_points_array,
)

logger = logging.getLogger(__name__)


class PointClass(enum.Enum):
    INSIDE = 'Inside'
    BOUNDARY = 'Boundary'
    OUTSIDE = 'Outside'


@dataclass(frozen=True)
class Domain:
    """A proper planar subdomain.

    ``box`` is the bounding box of a bounded domain, or the truncation box
    of an unbounded one. The box only limits discretization: boundary
    distance is always measured against ``boundary``.
    """

    name: str
    primitives: Tuple[Primitive, ...]
    boundary: Tuple[BoundaryElement, ...]
    box: Box
    unbounded: bool = False
    complement: bool = False
    inner_radius: float = 0.0
    metadata: Mapping[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if not self.boundary:
            raise InvalidDomain('a proper subdomain needs a nonempty boundary', name=self.name)
        if not self.primitives:
            raise InvalidDomain('a domain needs at least one primitive', name=self.name)

    # -- tolerances ---------------------------------------------------------

    @property
    def snap_tolerance(self) -> float:
        return settings.QHGEO['SNAP_FACTOR'] * self.box.diagonal()

    # -- vectorized queries -------------------------------------------------

    def chainDistance(self, points) -> np.ndarray:
        array = as_points_array(points)
        result = np.full(len(array), np.inf)
        for element in self.boundary:
            np.minimum(result, element.distances(array), out=result)
        return result

    def memberMask(self, points) -> np.ndarray:
        array = as_points_array(points)
        member = np.zeros(len(array), dtype=bool)
        for primitive in self.primitives:
            member |= primitive.contains(array)
        return ~member if self.complement else member

    def insideMask(self, points) -> np.ndarray:
        array = as_points_array(points)
        return self.memberMask(array) & (self.chainDistance(array) >= self.snap_tolerance)

    def truncationMask(self, points) -> np.ndarray:
        array = as_points_array(points)
        keep = self.box.contains(array)
        if self.inner_radius > 0:
            for element in self.boundary:
                if isinstance(element, PunctureElement):
                    keep &= element.distances(array) >= self.inner_radius
        return keep

    def segmentInsideMask(self, starts, ends, max_steps: int = 64) -> np.ndarray:
        """Sphere-trace each segment against the boundary chain.

        A segment is accepted when every traced ball stays clear of the chain
        and both endpoints are Inside. Exhausting ``max_steps`` rejects.
        """
        starts = as_points_array(starts)
        ends = as_points_array(ends)
        offsets = ends - starts
        lengths = np.hypot(offsets[:, 0], offsets[:, 1])
        safeLengths = np.where(lengths > 0, lengths, 1.0)
        directions = offsets / safeLengths[:, None]

        accepted = self.insideMask(starts) & self.insideMask(ends)
        pending = accepted & (lengths > 0)
        travelled = np.zeros(len(starts))
        snap = self.snap_tolerance
        for _ in range(max_steps):
            if not pending.any():
                break
            index = np.nonzero(pending)[0]
            checkpoints = starts[index] + directions[index] * travelled[index, None]
            clearance = self.chainDistance(checkpoints)
            blocked = clearance < snap
            accepted[index[blocked]] = False
            pending[index[blocked]] = False
            remaining = lengths[index] - travelled[index]
            finished = ~blocked & (clearance >= remaining)
            pending[index[finished]] = False
            advancing = ~blocked & ~finished
            travelled[index[advancing]] += clearance[advancing]
        accepted[pending] = False
        return accepted

    # -- scalar helpers -----------------------------------------------------

    def classify(self, p: Point) -> PointClass:
        array = p.asArray()[None, :]
        if self.chainDistance(array)[0] < self.snap_tolerance:
            return PointClass.BOUNDARY
        if self.memberMask(array)[0]:
            return PointClass.INSIDE
        return PointClass.OUTSIDE

    def delta(self, p: Point) -> float:
        if self.classify(p) is not PointClass.INSIDE:
            raise PointNotInterior(f'{p} is not inside {self.name}', point=list(p.asTuple()))
        return float(self.chainDistance(p.asArray()[None, :])[0])

    def nearestBoundaryPoint(self, p: Point) -> Point:
        array = p.asArray()[None, :]
        distances = [float(element.distances(array)[0]) for element in self.boundary]
        closest = self.boundary[int(np.argmin(distances))]
        return closest.nearestPoint(p)

    # -- identity -----------------------------------------------------------

    def toRecord(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {
            'name': self.name,
            'primitives': [primitive.toRecord() for primitive in self.primitives],
            'boundary': [element.toRecord() for element in self.boundary],
            'complement': self.complement,
        }
        boxRecord = self.box.toRecord()
        if self.unbounded:
            boxRecord['inner_radius'] = self.inner_radius
            record['truncation'] = boxRecord
        else:
            record['bbox'] = boxRecord
        if self.metadata:
            record['catalog'] = dict(self.metadata)
        return record

    @property
    def fingerprint(self) -> str:
        payload = json.dumps(self.toRecord(), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode('utf-8')).hexdigest()[:16]

    def __str__(self):
        return self.name


def classify_point(d: Domain, p: Point) -> PointClass:
    return d.classify(p)


def boundary_distance(d: Domain, p: Point) -> float:
    return d.delta(p)


def nearest_boundary_point(d: Domain, p: Point) -> Point:
    return d.nearestBoundaryPoint(p)


def segment_inside(d: Domain, a: Point, b: Point) -> bool:
    return bool(d.segmentInsideMask(a.asArray(), b.asArray())[0])


def check_boundary_chain(d: Domain, tolerance: Optional[float] = None) -> bool:
    """Midpoints of boundary elements classify as Boundary and are adjacent to
    Inside points on at least one side."""
    step = tolerance if tolerance is not None else 100.0 * d.snap_tolerance
    for element in d.boundary:
        middle = element.midpoint()
        if d.classify(middle) is not PointClass.BOUNDARY:
            logger.warning('boundary element %s midpoint does not classify as Boundary', element.kind)
            return False
        offsets = np.array([[step, 0.0], [-step, 0.0], [0.0, step], [0.0, -step],
                            [step, step], [-step, -step], [step, -step], [-step, step]])
        if not d.insideMask(middle.asArray() + offsets).any():
            logger.warning('boundary element %s is not adjacent to the domain', element.kind)
            return False
    return True
