"""The comb domain: a base rectangle carrying shrinking capped teeth, and its
exterior complement."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

from geometry.domain import Domain
from geometry.exceptions import InvalidParams
from geometry.paths import PolyPath
from geometry.primitives import (
    ArcElement,
    Box,
    Point,
    Rectangle,
    SegmentElement,
    SemiDisc,
)

logger = logging.getLogger(__name__)

BASE_DEPTH = 2.0


@dataclass(frozen=True)
class CombParams:
    u: float
    t: float
    v: float
    k_max: int = 8

    def __post_init__(self):
        if not (0 < self.u < self.t < self.v < 1):
            raise InvalidParams('comb parameters need 0 < u < t < v < 1',
                                u=self.u, t=self.t, v=self.v)
        if int(self.k_max) != self.k_max or self.k_max < 1:
            raise InvalidParams('k_max must be a positive integer', k_max=self.k_max)

    @property
    def alpha(self) -> float:
        return math.log(self.v) / math.log(self.t)


@dataclass(frozen=True)
class CombLayout:
    params: CombParams
    x_k: Tuple[float, ...]
    s: float
    alpha: float
    z_k: Tuple[Point, ...]

    def toothWidth(self, k: int) -> float:
        return self.params.u ** k

    def toothHeight(self, k: int) -> float:
        return self.params.v ** k

    def toothAxis(self, k: int) -> float:
        return self.x_k[k - 1] + 0.5 * self.toothWidth(k)

    def toothContaining(self, p: Point) -> Optional[int]:
        """Index k of the tooth (with its cap) that holds ``p``, if any."""
        if p.y < 0:
            return None
        for k in range(1, self.params.k_max + 1):
            left = self.x_k[k - 1]
            width = self.toothWidth(k)
            if left <= p.x <= left + width:
                capCenter = Point(left + 0.5 * width, self.toothHeight(k))
                if p.y <= self.toothHeight(k) or p.distanceTo(capCenter) <= 0.5 * width:
                    return k
        return None

    def witness(self, k: int) -> Point:
        return self.z_k[k - 1]


def comb_layout(p: CombParams) -> CombLayout:
    u, t = p.u, p.t
    positions = [0.0]
    # one extra abscissa so that every generated tooth has a gap witness
    for k in range(1, p.k_max + 1):
        positions.append(positions[-1] + u ** k + t ** k)
    witnesses = tuple(Point(positions[k] - 0.5 * t ** k, t ** k) for k in range(1, p.k_max + 1))
    return CombLayout(
        params=p,
        x_k=tuple(positions),
        s=u / (1 - u) + t / (1 - t),
        alpha=p.alpha,
        z_k=witnesses,
    )


def combPrimitives(layout: CombLayout):
    p = layout.params
    shapes = [Rectangle(0.0, layout.s, -BASE_DEPTH, 0.0)]
    for k in range(1, p.k_max + 1):
        left = layout.x_k[k - 1]
        width = p.u ** k
        height = p.v ** k
        shapes.append(Rectangle(left, left + width, 0.0, height))
        shapes.append(SemiDisc(Point(left + 0.5 * width, height), 0.5 * width))
    return tuple(shapes)


def combBoundary(layout: CombLayout):
    """Boundary chain of the union, walked clockwise from the bottom-left corner."""
    p = layout.params
    chain = []
    firstHeight = p.v
    chain.append(SegmentElement(Point(0.0, -BASE_DEPTH), Point(0.0, firstHeight)))
    for k in range(1, p.k_max + 1):
        left = layout.x_k[k - 1]
        width = p.u ** k
        height = p.v ** k
        right = left + width
        if k > 1:
            chain.append(SegmentElement(Point(left, 0.0), Point(left, height)))
        chain.append(ArcElement(Point(left + 0.5 * width, height), 0.5 * width, math.pi, 0.0, ccw=False))
        chain.append(SegmentElement(Point(right, height), Point(right, 0.0)))
        nextLeft = layout.x_k[k] if k < p.k_max else layout.s
        chain.append(SegmentElement(Point(right, 0.0), Point(nextLeft, 0.0)))
    chain.append(SegmentElement(Point(layout.s, 0.0), Point(layout.s, -BASE_DEPTH)))
    chain.append(SegmentElement(Point(layout.s, -BASE_DEPTH), Point(0.0, -BASE_DEPTH)))
    return tuple(chain)


def combBox(layout: CombLayout) -> Box:
    p = layout.params
    top = max(p.v ** k + 0.5 * p.u ** k for k in range(1, p.k_max + 1))
    return Box(0.0, layout.s, -BASE_DEPTH, top)


def combMetadata(p: CombParams, **extra):
    record = {'name': 'comb', 'u': p.u, 't': p.t, 'v': p.v, 'kmax': p.k_max}
    record.update(extra)
    return record


def build_comb(p: CombParams) -> Tuple[Domain, CombLayout]:
    layout = comb_layout(p)
    if layout.x_k[p.k_max - 1] + p.u ** p.k_max >= layout.s:
        raise InvalidParams('teeth do not fit inside the base span')
    domain = Domain(
        name=f'comb(u={p.u:g},t={p.t:g},v={p.v:g},kmax={p.k_max})',
        primitives=combPrimitives(layout),
        boundary=combBoundary(layout),
        box=combBox(layout),
        metadata=combMetadata(p),
    )
    logger.debug('built %s with %d boundary elements', domain.name, len(domain.boundary))
    return domain, layout


def build_comb_complement(p: CombParams, margin: float = 1.0) -> Domain:
    if not margin > 0:
        raise InvalidParams('truncation margin must be positive', margin=margin)
    comb, layout = build_comb(p)
    return Domain(
        name=f'complement of {comb.name}',
        primitives=comb.primitives,
        boundary=comb.boundary,
        box=comb.box.inflated(margin),
        unbounded=True,
        complement=True,
        metadata=combMetadata(p, name='comb-complement', margin=margin),
    )


def comb_phi_bound(p: CombParams, ratio: float) -> float:
    """tau + 8 tau^alpha with t^alpha = v."""
    return ratio + 8.0 * ratio ** p.alpha


def ratio_paper_bound(p: CombParams, k: int) -> float:
    return 3.0 / (2.0 * p.t) + 0.5 + (p.u / p.t) ** (k + 1)


def ratio_coarse_bound(p: CombParams) -> float:
    return 3.0 / (2.0 * p.t) + 1.5


def gap_length_lower_bound(p: CombParams, k: int) -> float:
    """log((v^k - t^k/2) / (t^k/2)), the length-based lower bound for k between
    consecutive gap witnesses."""
    half = 0.5 * p.t ** k
    return math.log((p.v ** k - half) / half)


def comb_witness_path(layout: CombLayout, x: Point, y: Point, d: float) -> PolyPath:
    """Polygonal path from x to y: to the medial axis of the tooth holding the
    point, down to height -d, across the base, and up the other tooth."""
    legs: List[Point] = [x]
    toothX = layout.toothContaining(x)
    toothY = layout.toothContaining(y)
    axisX = layout.toothAxis(toothX) if toothX else x.x
    axisY = layout.toothAxis(toothY) if toothY else y.x
    if toothX:
        legs.append(Point(axisX, x.y))
    legs.append(Point(axisX, -d))
    legs.append(Point(axisY, -d))
    if toothY:
        legs.append(Point(axisY, y.y))
    legs.append(y)
    return PolyPath.fromPoints(legs)
