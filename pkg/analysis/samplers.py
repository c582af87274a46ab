"""Random interior points, pairs and triples for the empirical certifiers."""

import logging
from typing import List, Optional, Tuple

import numpy as np
from django.conf import settings
from scipy import stats

from geometry.domain import Domain
from geometry.exceptions import InvalidParams
from geometry.primitives import Point

logger = logging.getLogger(__name__)

SAMPLERS = ('uniform', 'boundary-biased')

MAX_DRAW_ROUNDS = 200

# depth of the second point, as a fraction of delta of the first
boundaryDepth = stats.beta(0.5, 1.0)


def make_rng(seed: Optional[int] = None) -> np.random.Generator:
    return np.random.default_rng(settings.QHGEO['SEED'] if seed is None else seed)


def sample_interior(d: Domain, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` points drawn uniformly from the part of ``d`` inside its box."""
    box = d.box
    accepted: List[np.ndarray] = []
    count = 0
    for _ in range(MAX_DRAW_ROUNDS):
        if count >= n:
            break
        draws = np.column_stack([
            rng.uniform(box.xmin, box.xmax, 4 * n),
            rng.uniform(box.ymin, box.ymax, 4 * n),
        ])
        keep = draws[d.insideMask(draws) & d.truncationMask(draws)]
        accepted.append(keep)
        count += len(keep)
    if count < n:
        raise InvalidParams(f'could not draw {n} interior points from {d.name}', drawn=count)
    return np.concatenate(accepted)[:n]


def towardBoundary(d: Domain, p: Point, rng: np.random.Generator) -> Point:
    nearest = d.nearestBoundaryPoint(p)
    for _ in range(MAX_DRAW_ROUNDS):
        fraction = float(boundaryDepth.rvs(random_state=rng))
        q = Point(nearest.x + fraction * (p.x - nearest.x), nearest.y + fraction * (p.y - nearest.y))
        candidate = q.asArray()[None, :]
        if d.insideMask(candidate)[0] and d.truncationMask(candidate)[0] and q != p:
            return q
    return p


def sample_pairs(d: Domain, n: int, sampler: str = 'uniform',
                 rng: Optional[np.random.Generator] = None) -> List[Tuple[Point, Point]]:
    if sampler not in SAMPLERS:
        raise InvalidParams(f'unknown sampler {sampler!r}', known=list(SAMPLERS))
    if n < 1:
        raise InvalidParams('need at least one sample', n=n)
    rng = rng if rng is not None else make_rng()
    firsts = sample_interior(d, n, rng)
    if sampler == 'uniform':
        seconds = sample_interior(d, n, rng)
        return [(Point(*a), Point(*b)) for a, b in zip(firsts.tolist(), seconds.tolist())]

    pairs = []
    for a in firsts.tolist():
        x = Point(*a)
        pairs.append((x, towardBoundary(d, x, rng)))
    logger.debug('drew %d boundary-biased pairs in %s', n, d.name)
    return pairs


def sample_triples(d: Domain, n: int, rng: Optional[np.random.Generator] = None):
    if n < 1:
        raise InvalidParams('need at least one triple', n=n)
    rng = rng if rng is not None else make_rng()
    points = sample_interior(d, 3 * n, rng).reshape(n, 3, 2)
    return [tuple(Point(*row) for row in triple) for triple in points.tolist()]
