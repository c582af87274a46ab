"""Monotone envelopes of sampled metric values, and the constants read off them."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from geometry.domain import Domain
from geometry.exceptions import BoundViolation, InvalidParams
from geometry.paths import PolyPath, point_at_length
from geometry.primitives import Point
from metrics.batch import evaluate_pairs, successful
from metrics.estimators import MetricSample
from analysis.samplers import make_rng, sample_pairs

logger = logging.getLogger(__name__)

DEFAULT_BINS = 16
SMALL_J = 1e-9
LOG_THREE_HALVES = math.log(1.5)

Bins = Tuple[Tuple[float, float], ...]


def monotone_envelope(abscissae: Sequence[float], values: Sequence[float], n_bins: int = DEFAULT_BINS) -> Bins:
    """(edge, sup of values with abscissa <= edge) over log-spaced edges.

    The sups are non-decreasing in the edge by construction.
    """
    abscissae = np.asarray(abscissae, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(abscissae) == 0:
        return ()
    order = np.argsort(abscissae, kind='stable')
    ordered = abscissae[order]
    running = np.maximum.accumulate(values[order])

    positive = ordered[ordered > 0]
    if len(positive) == 0:
        return ((0.0, float(running[-1])),)
    edges = np.geomspace(positive[0], positive[-1], max(1, n_bins)) if len(positive) > 1 else positive[-1:]
    if ordered[0] == 0:
        edges = np.concatenate([[0.0], edges])
    edges[-1] = ordered[-1]

    bins = []
    for edge in edges:
        last = int(np.searchsorted(ordered, edge, side='right')) - 1
        if last < 0:
            continue
        bins.append((float(edge), float(running[last])))
    return tuple(bins)


def evaluate_envelope(bins: Bins, ratio: float) -> float:
    """Step lookup into ``bins``; past the last edge the value grows like log(1 + ratio)."""
    if not bins:
        raise InvalidParams('empty envelope')
    for edge, value in bins:
        if ratio <= edge:
            return value
    lastEdge, lastValue = bins[-1]
    if lastEdge <= 0:
        return lastValue
    return lastValue * max(1.0, math.log1p(ratio) / math.log1p(lastEdge))


@dataclass(frozen=True)
class PhiProfile:
    bins: Bins
    sample_count: int
    skipped: int = 0

    def __call__(self, ratio: float) -> float:
        return evaluate_envelope(self.bins, ratio)

    def rows(self) -> List[List[float]]:
        return [[edge, value] for edge, value in self.bins]


def profile_from_samples(samples: Iterable[MetricSample], n_bins: int = DEFAULT_BINS, skipped: int = 0) -> PhiProfile:
    samples = list(samples)
    bins = monotone_envelope([s.ratio for s in samples], [s.k_est for s in samples], n_bins)
    return PhiProfile(bins=bins, sample_count=len(samples), skipped=skipped)


def sampled_metrics(d: Domain, n_samples: int, sampler: str, rel_tol: Optional[float],
                    seed: Optional[int], threads: Optional[int]) -> Tuple[List[MetricSample], int]:
    pairs = sample_pairs(d, n_samples, sampler, make_rng(seed))
    outcomes = evaluate_pairs(d, pairs, rel_tol, threads=threads)
    samples = successful(outcomes)
    skipped = len(outcomes) - len(samples)
    if skipped:
        logger.warning('%d of %d samples in %s failed', skipped, len(outcomes), d.name)
    return samples, skipped


def phi_profile(d: Domain, n_samples: int, sampler: str = 'uniform', rel_tol: Optional[float] = None,
                seed: Optional[int] = None, threads: Optional[int] = None, n_bins: int = DEFAULT_BINS) -> PhiProfile:
    if n_samples < 1:
        raise InvalidParams('n_samples must be at least 1', n_samples=n_samples)
    samples, skipped = sampled_metrics(d, n_samples, sampler, rel_tol, seed, threads)
    return profile_from_samples(samples, n_bins, skipped)


def check_comb_phi(samples: Iterable[MetricSample], alpha: float) -> int:
    """Raise BoundViolation at the first sample with k > r + 8 r^alpha + 3 k_err."""
    checked = 0
    for sample in samples:
        bound = sample.ratio + 8.0 * sample.ratio ** alpha + 3.0 * sample.k_err
        if sample.k_est > bound:
            raise BoundViolation('comb sample exceeds tau + 8 tau^alpha', witness=sample.toRecord(), bound=bound)
        checked += 1
    return checked


# -- uniformity ---------------------------------------------------------------

@dataclass(frozen=True)
class UniformityReport:
    sup_ratio_kj: float
    witness: Optional[Tuple[Point, Point]]
    samples: int
    unbounded_trend: bool = False

    def toRecord(self):
        return {
            'sup_ratio_kj': self.sup_ratio_kj,
            'witness': [list(p.asTuple()) for p in self.witness] if self.witness else None,
            'samples': self.samples,
            'unbounded_trend': self.unbounded_trend,
        }


def growsWithoutCeiling(depths: Sequence[float], ratios: Sequence[float], groups: int = 4) -> bool:
    """Sups of ``ratios`` over groups of decreasing boundary distance rise
    strictly and at least double from the farthest group to the nearest."""
    if len(ratios) < 2 * groups:
        return False
    order = np.argsort(-np.asarray(depths), kind='stable')
    sups = [float(np.max(np.asarray(ratios)[chunk])) for chunk in np.array_split(order, groups)]
    rising = all(later > earlier for earlier, later in zip(sups, sups[1:]))
    return rising and sups[-1] >= 2.0 * sups[0]


def uniformity_from_samples(d: Domain, samples: Iterable[MetricSample]) -> UniformityReport:
    valid = [s for s in samples if s.j >= SMALL_J]
    if not valid:
        return UniformityReport(0.0, None, 0)
    ratios = [s.k_est / s.j for s in valid]
    best = int(np.argmax(ratios))
    depths = [min(d.delta(s.x), d.delta(s.y)) for s in valid]
    return UniformityReport(
        sup_ratio_kj=float(ratios[best]),
        witness=(valid[best].x, valid[best].y),
        samples=len(valid),
        unbounded_trend=growsWithoutCeiling(depths, ratios),
    )


def uniformity_constant(d: Domain, n_samples: int, rel_tol: Optional[float] = None, sampler: str = 'boundary-biased',
                        seed: Optional[int] = None, threads: Optional[int] = None) -> UniformityReport:
    if n_samples < 1:
        raise InvalidParams('n_samples must be at least 1', n_samples=n_samples)
    samples, _ = sampled_metrics(d, n_samples, sampler, rel_tol, seed, threads)
    report = uniformity_from_samples(d, samples)
    logger.info('uniformity constant of %s is at least %.6g over %d samples', d.name, report.sup_ratio_kj,
                report.samples)
    return report


# -- twisted cones --------------------------------------------------------------

@dataclass(frozen=True)
class JohnReport:
    c_est: float
    witness: Optional[Tuple[Point, Point]]
    witness_point: Optional[Point]
    samples: int
    unbounded_trend: bool = False

    def toRecord(self):
        return {
            'c_est': self.c_est,
            'witness': [list(p.asTuple()) for p in self.witness] if self.witness else None,
            'witness_point': list(self.witness_point.asTuple()) if self.witness_point else None,
            'samples': self.samples,
            'unbounded_trend': self.unbounded_trend,
        }


def path_john_constant(d: Domain, path: PolyPath) -> Tuple[float, Optional[Point]]:
    """max over vertices z of min(l(path[x, z]), l(path[z, y])) / delta(z)."""
    if len(path) < 3:
        return 0.0, None
    vertices = path.asArray()
    travelled = np.concatenate([[0.0], np.cumsum(path.segmentLengths())])
    shorter = np.minimum(travelled, travelled[-1] - travelled)[1:-1]
    ratios = shorter / d.chainDistance(vertices[1:-1])
    worst = int(np.argmax(ratios))
    return float(ratios[worst]), path.vertices[worst + 1]


def john_from_samples(d: Domain, samples: Iterable[MetricSample]) -> JohnReport:
    """Largest path John constant over the sample geodesics. The trend flag
    reads the per-pair constants against the depth of each pair."""
    best, witness, point = 0.0, None, None
    depths, values = [], []
    for sample in samples:
        value, z = path_john_constant(d, sample.geodesic)
        depths.append(min(d.delta(sample.x), d.delta(sample.y)))
        values.append(value)
        if value > best:
            best, witness, point = value, (sample.x, sample.y), z
    return JohnReport(best, witness, point, len(values), growsWithoutCeiling(depths, values))


def john_constant(d: Domain, n_samples: int, rel_tol: Optional[float] = None, sampler: str = 'uniform',
                  seed: Optional[int] = None, threads: Optional[int] = None) -> JohnReport:
    if n_samples < 1:
        raise InvalidParams('n_samples must be at least 1', n_samples=n_samples)
    samples, _ = sampled_metrics(d, n_samples, sampler, rel_tol, seed, threads)
    return john_from_samples(d, samples)


@dataclass(frozen=True)
class TwistedSplit:
    x_prime: Point
    y_prime: Point
    min_delta: float
    threshold: float

    @property
    def holds(self) -> bool:
        return self.min_delta >= self.threshold


def twisted_path_split(d: Domain, path: PolyPath, c: float) -> TwistedSplit:
    """Points at Euclidean arclength |x - y|/10 from both ends of ``path``, and
    whether both stay at least |x - y|/(10c) from the boundary."""
    if not c > 0:
        raise InvalidParams('c must be positive', c=c)
    span = path.start.distanceTo(path.end)
    if span == 0:
        raise InvalidParams('path endpoints coincide')
    step = span / 10.0
    xPrime, _ = point_at_length(path, step)
    yPrime, _ = point_at_length(path.reversed(), step)
    return TwistedSplit(xPrime, yPrime, min(d.delta(xPrime), d.delta(yPrime)), span / (10.0 * c))


# -- constant chain -------------------------------------------------------------

def theorem12_constant_chain(phi: Callable[[float], float], c: float) -> float:
    """Uniformity constant of a phi-uniform domain with twisted-cone constant c.

    b2 covers the middle stretch of the geodesic between the two split points
    and equals phi(12c) / log(3/2). b1 and b3 cover the end stretches: either
    the half-ball estimate gives 2, or splitting the geodesic at points with
    delta comparable to |x - y| gives (1 + c)/log(3/2) + c.
    """
    if not c > 0:
        raise InvalidParams('c must be positive', c=c)
    b2 = phi(12.0 * c) / LOG_THREE_HALVES
    b1 = b3 = max(2.0, (1.0 + c) / LOG_THREE_HALVES + c)
    return b1 + b2 + b3


def phi_from_eta(bins: Bins) -> Callable[[float], float]:
    """phi(t) = eta(log(1 + t)) for the eta envelope in ``bins``."""
    if not bins:
        raise InvalidParams('empty envelope')

    def phi(ratio: float) -> float:
        return evaluate_envelope(bins, math.log1p(ratio))

    return phi
