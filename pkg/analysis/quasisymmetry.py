"""Empirical distortion envelope of the identity map from (G, j) to (G, k)."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

from geometry.domain import Domain
from geometry.exceptions import InvalidParams, QhGeoError
from geometry.primitives import Point
from metrics.batch import run_pool
from metrics.estimators import SMALL_RATIO, k_metric, normalized_partner
from analysis.profiles import DEFAULT_BINS, Bins, monotone_envelope
from analysis.samplers import make_rng, sample_triples

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TripleSample:
    x: Point
    y: Point
    z: Point
    j_xy: float
    k_xy: float
    j_yz: float
    k_yz: float
    normalized: bool = False

    @property
    def j_ratio(self) -> float:
        return self.j_xy / self.j_yz

    @property
    def k_ratio(self) -> float:
        return self.k_xy / self.k_yz


@dataclass(frozen=True)
class QsEnvelope:
    bins: Bins
    triples: Tuple[TripleSample, ...]
    skipped: int

    def rows(self) -> List[List[float]]:
        return [[edge, value] for edge, value in self.bins]


def measure_triple(d: Domain, x: Point, y: Point, z: Point, rel_tol: Optional[float] = None,
                   normalized: bool = False) -> Optional[TripleSample]:
    if x == y or y == z:
        return None
    first = k_metric(d, x, y, rel_tol)
    second = k_metric(d, y, z, rel_tol)
    if first.j < SMALL_RATIO or second.j < SMALL_RATIO:
        return None
    return TripleSample(x, y, z, first.j, first.k_est, second.j, second.k_est, normalized)


def normalized_triple(d: Domain, x: Point, y: Point, rel_tol: Optional[float] = None) -> Optional[TripleSample]:
    """Triple whose third point sits on the boundary normal through y with
    delta(z) = delta(y)/e, so that j(y, z) = 1."""
    return measure_triple(d, x, y, normalized_partner(d, y), rel_tol, normalized=True)


def qs_identity_sampler(d: Domain, n_triples: int, rel_tol: Optional[float] = None, seed: Optional[int] = None,
                        threads: Optional[int] = None, with_normalized: bool = True,
                        n_bins: int = DEFAULT_BINS) -> QsEnvelope:
    if n_triples < 1:
        raise InvalidParams('n_triples must be at least 1', n_triples=n_triples)
    jobs = []
    for x, y, z in sample_triples(d, n_triples, make_rng(seed)):
        jobs.append((x, y, z, False))
        if with_normalized:
            jobs.append((x, y, None, True))

    def run(job):
        x, y, z, normalized = job
        try:
            if normalized:
                return normalized_triple(d, x, y, rel_tol)
            return measure_triple(d, x, y, z, rel_tol)
        except QhGeoError as error:
            logger.warning('skipping triple at %s: %s', y, error)
            return None

    measured = run_pool(run, jobs, threads)
    triples = tuple(triple for triple in measured if triple is not None)
    bins = monotone_envelope([t.j_ratio for t in triples], [t.k_ratio for t in triples], n_bins)
    return QsEnvelope(bins, triples, len(jobs) - len(triples))
