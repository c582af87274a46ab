"""Named domains used by the metric estimators and the experiments."""

import logging
import math
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from geometry.domain import Domain
from geometry.exceptions import BadTruncation, InvalidParams
from geometry.primitives import (
    ArcElement,
    Box,
    Disc,
    HalfPlane,
    LineElement,
    Point,
    PunctureElement,
    SegmentElement,
    WholePlane,
)
from domains.comb import CombParams, build_comb, build_comb_complement

logger = logging.getLogger(__name__)

DEFAULT_HALF_PLANE_BOX = Box(-5.0, 5.0, 0.0, 5.0)


def build_disc(center: Point = Point(0.0, 0.0), radius: float = 1.0) -> Domain:
    if not radius > 0:
        raise InvalidParams('disc radius must be positive', radius=radius)
    return Domain(
        name='disc' if (center, radius) == (Point(0.0, 0.0), 1.0) else f'disc(center={center},r={radius:g})',
        primitives=(Disc(center, radius),),
        boundary=(ArcElement(center, radius, 0.0, 0.0),),
        box=Box(center.x - radius, center.x + radius, center.y - radius, center.y + radius),
        metadata={'name': 'disc', 'center': list(center.asTuple()), 'radius': radius},
    )


def checkTruncation(domain: Domain, samples: int = 9) -> Domain:
    """A truncation box must overlap the domain somewhere."""
    box = domain.box
    gridX, gridY = np.meshgrid(np.linspace(box.xmin, box.xmax, samples),
                               np.linspace(box.ymin, box.ymax, samples))
    checkpoints = np.column_stack([gridX.ravel(), gridY.ravel()])
    if not (domain.insideMask(checkpoints) & domain.truncationMask(checkpoints)).any():
        raise BadTruncation('truncation box does not meet the domain', name=domain.name,
                            box=box.toRecord())
    return domain


def build_half_plane(box: Optional[Box] = None,
                     point: Point = Point(0.0, 0.0),
                     normal: Point = Point(0.0, 1.0)) -> Domain:
    """Open half-plane {(p - point) . normal > 0}, truncated to ``box``."""
    box = box or DEFAULT_HALF_PLANE_BOX
    if normal.x == 0 and normal.y == 0:
        raise InvalidParams('half-plane normal must be nonzero')
    domain = Domain(
        name='half-plane',
        primitives=(HalfPlane(point, normal),),
        boundary=(LineElement(point, Point(normal.y, -normal.x)),),
        box=box,
        unbounded=True,
        metadata={'name': 'half-plane', 'box': box.toRecord()},
    )
    return checkTruncation(domain)


def build_punctured_plane(r_in: float = 0.01, r_out: float = 100.0) -> Domain:
    if not (0 < r_in < r_out):
        raise BadTruncation('punctured plane needs 0 < r_in < r_out', r_in=r_in, r_out=r_out)
    return Domain(
        name='punctured-plane',
        primitives=(WholePlane(),),
        boundary=(PunctureElement(Point(0.0, 0.0)),),
        box=Box(-r_out, r_out, -r_out, r_out),
        unbounded=True,
        inner_radius=r_in,
        metadata={'name': 'punctured-plane', 'r_in': r_in, 'r_out': r_out},
    )


def build_slit_disc() -> Domain:
    """Unit disc minus the radial segment [0, 1] x {0}; the slit bounds the
    domain from both sides."""
    origin = Point(0.0, 0.0)
    return Domain(
        name='slit-disc',
        primitives=(Disc(origin, 1.0),),
        boundary=(
            ArcElement(origin, 1.0, 0.0, 0.0),
            SegmentElement(origin, Point(1.0, 0.0)),
        ),
        box=Box(-1.0, 1.0, -1.0, 1.0),
        metadata={'name': 'slit-disc'},
    )


def catalogComb(u: float = 0.2, t: float = 0.4, v: float = 0.7, kmax: int = 8) -> Domain:
    domain, _ = build_comb(CombParams(u=u, t=t, v=v, k_max=int(kmax)))
    return domain


def catalogCombComplement(u: float = 0.2, t: float = 0.4, v: float = 0.7, kmax: int = 8,
                          margin: float = 1.0) -> Domain:
    return checkTruncation(build_comb_complement(CombParams(u=u, t=t, v=v, k_max=int(kmax)), margin))


def catalogDisc(center: Sequence[float] = (0.0, 0.0), radius: float = 1.0) -> Domain:
    return build_disc(Point.fromSequence(center), radius)


def catalogHalfPlane(box=None, point: Sequence[float] = (0.0, 0.0),
                     normal: Sequence[float] = (0.0, 1.0)) -> Domain:
    if isinstance(box, dict):
        box = Box(box['xmin'], box['xmax'], box['ymin'], box['ymax'])
    return build_half_plane(box, Point.fromSequence(point), Point.fromSequence(normal))


CATALOG: Dict[str, Callable[..., Domain]] = {
    'disc': catalogDisc,
    'half-plane': catalogHalfPlane,
    'punctured-plane': build_punctured_plane,
    'slit-disc': build_slit_disc,
    'comb': catalogComb,
    'comb-complement': catalogCombComplement,
}


def catalog_names():
    return sorted(CATALOG)


def catalog_domain(name: str, **options) -> Domain:
    builder = CATALOG.get(name)
    if builder is None:
        raise InvalidParams(f'unknown domain {name!r}', known=catalog_names())
    logger.debug('building catalog domain %s with %s', name, options)
    return builder(**options)


SLIT_EPSILONS = (0.1, 0.05, 0.025, 0.0125)


def slit_witnesses(epsilon: float):
    """The pair (0.5, eps), (0.5, -eps) on either side of the slit."""
    if not 0 < epsilon < 0.5:
        raise InvalidParams('epsilon must lie in (0, 0.5)', epsilon=epsilon)
    return Point(0.5, epsilon), Point(0.5, -epsilon)


def slit_k_lower_bound(epsilon: float) -> float:
    """Any curve joining the slit witnesses winds around the origin: each
    angular sector near the slit costs log(cot(theta/2)), the far side pi."""
    theta = math.atan2(epsilon, 0.5)
    return 2.0 * math.log(1.0 / math.tan(0.5 * theta)) + math.pi
