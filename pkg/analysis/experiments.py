"""Experiments on the comb and its complement, and pair trends such as the
slit disc sequence."""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from geometry.domain import Domain
from geometry.exceptions import BoundViolation, InvalidParams
from geometry.paths import PolyPath
from geometry.primitives import Box, Point
from domains.catalog import build_slit_disc, checkTruncation, slit_k_lower_bound, slit_witnesses, SLIT_EPSILONS
from domains.comb import (
    CombParams,
    build_comb,
    build_comb_complement,
    comb_layout,
    comb_witness_path,
    gap_length_lower_bound,
    ratio_coarse_bound,
)
from metrics.batch import run_pool
from metrics.estimators import MetricSample, k_metric, qh_length

logger = logging.getLogger(__name__)

KERR_SLACK = 3.0


@dataclass(frozen=True)
class CombDivergenceRow:
    k_index: int
    j_val: float
    j_paper_bound: float
    k_est: float
    k_err: float
    k_lower_bound: float
    ratio_kj: float
    geodesic: Optional[PolyPath] = None

    COLUMNS = ('k_index', 'j_val', 'j_paper_bound', 'k_est', 'k_lower_bound', 'ratio_kj')

    def asRow(self) -> List:
        return [getattr(self, column) for column in self.COLUMNS]


def box_clearance(box: Box, path: PolyPath) -> float:
    """Smallest distance from a vertex of ``path`` to the sides of ``box``."""
    points = path.asArray()
    gaps = np.column_stack([points[:, 0] - box.xmin, box.xmax - points[:, 0],
                            points[:, 1] - box.ymin, box.ymax - points[:, 1]])
    return float(gaps.min())


def truncation_note(p: CombParams) -> str:
    return (f'teeth past k={p.k_max} are omitted; boundary distance near the right edge '
            f'may shift by less than u^{p.k_max} = {p.u ** p.k_max:.3g}')


def log_envelope_fit(rows: Sequence[CombDivergenceRow]) -> Tuple[float, float]:
    """Nondecreasing line k = a + b * j through the first two rows, with j on
    the log1p(ratio) scale the distance ratio metric already uses."""
    first, second = rows[0], rows[1]
    run = second.j_val - first.j_val
    slope = max(0.0, (second.k_est - first.k_est) / run) if run > 0 else 0.0
    if slope == 0.0:
        return max(first.k_est, second.k_est), 0.0
    return first.k_est - slope * first.j_val, slope


@dataclass(frozen=True)
class CombDivergenceReport:
    rows: Tuple[CombDivergenceRow, ...]
    j_bound: float
    clearance: float
    margin: float
    truncation_note: str
    fit: Optional[Tuple[float, float]] = None

    @property
    def increasing(self) -> bool:
        return strictly_increasing([row.ratio_kj for row in self.rows])

    @property
    def exceeds_fit(self) -> bool:
        """Every row after the two fitted ones lies above the fitted envelope."""
        if self.fit is None or len(self.rows) < 3:
            return False
        a, b = self.fit
        return all(row.k_est > a + b * row.j_val for row in self.rows[2:])

    @property
    def not_psi_uniform(self) -> bool:
        """Trend verdict: k keeps rising past any envelope fitted to the first
        rows while j stays under its bound. Evidence, not proof."""
        bounded = all(row.j_val <= self.j_bound for row in self.rows)
        return self.increasing and self.exceeds_fit and bounded

    def toRecord(self) -> Dict:
        return {
            'rows': [dict(zip(CombDivergenceRow.COLUMNS, row.asRow())) for row in self.rows],
            'ratio_increasing': self.increasing,
            'envelope_fit': list(self.fit) if self.fit is not None else None,
            'exceeds_fit': self.exceeds_fit,
            'not_psi_uniform': self.not_psi_uniform,
            'box_clearance': self.clearance,
            'margin': self.margin,
            'truncation_note': self.truncation_note,
        }


def comb_divergence(p: CombParams, k_range: Iterable[int], rel_tol: Optional[float] = None,
                    max_level: Optional[int] = None, margin: float = 1.0,
                    threads: Optional[int] = None) -> CombDivergenceReport:
    """One row per k comparing k and j between the gap witnesses z_k and z_{k+1}
    in the exterior of the comb."""
    indices = sorted(set(int(k) for k in k_range))
    if not indices or indices[0] < 1 or indices[-1] + 1 > p.k_max:
        raise InvalidParams(f'k_range must lie in 1..{p.k_max - 1}', k_range=indices)
    layout = comb_layout(p)
    exterior = checkTruncation(build_comb_complement(p, margin))
    jBound = math.log1p(ratio_coarse_bound(p))

    def row(k: int) -> CombDivergenceRow:
        x, y = layout.witness(k), layout.witness(k + 1)
        sample = k_metric(exterior, x, y, rel_tol, max_level)
        return CombDivergenceRow(
            k_index=k,
            j_val=sample.j,
            j_paper_bound=jBound,
            k_est=sample.k_est,
            k_err=sample.k_err,
            k_lower_bound=gap_length_lower_bound(p, k),
            ratio_kj=sample.k_est / sample.j,
            geodesic=sample.geodesic,
        )

    rows = tuple(run_pool(row, indices, threads))
    for current in rows:
        if current.j_val > current.j_paper_bound:
            raise BoundViolation(f'j exceeds its bound at k={current.k_index}', row=current.asRow())
        if current.k_est + KERR_SLACK * current.k_err < current.k_lower_bound:
            raise BoundViolation(f'k falls below its lower bound at k={current.k_index}', row=current.asRow())
        logger.info('comb gap %d: j=%.6g k=%.6g ratio=%.6g', current.k_index, current.j_val, current.k_est,
                    current.ratio_kj)

    clearance = min(box_clearance(exterior.box, current.geodesic) for current in rows)
    if clearance <= 0.5 * margin:
        raise BoundViolation(f'gap geodesics come within {clearance:.3g} of the truncation box', margin=margin)
    if not strictly_increasing([current.ratio_kj for current in rows]):
        raise BoundViolation('ratio k/j is not strictly increasing across the gaps',
                             ratios=[current.ratio_kj for current in rows])

    report = CombDivergenceReport(
        rows=rows,
        j_bound=jBound,
        clearance=clearance,
        margin=margin,
        truncation_note=truncation_note(p),
        fit=log_envelope_fit(rows) if len(rows) >= 2 else None,
    )
    logger.info('comb divergence over k=%s: not psi-uniform trend %s', indices, report.not_psi_uniform)
    logger.info(report.truncation_note)
    return report


def strictly_increasing(values: Sequence[float]) -> bool:
    return all(later > earlier for earlier, later in zip(values, values[1:]))


@dataclass(frozen=True)
class PairTrend:
    rows: Tuple[MetricSample, ...]

    @property
    def ratios(self) -> List[float]:
        return [sample.k_est / sample.j for sample in self.rows]

    @property
    def increasing(self) -> bool:
        return strictly_increasing(self.ratios)


def pair_trend(d: Domain, pairs: Sequence[Tuple[Point, Point]], rel_tol: Optional[float] = None,
               max_level: Optional[int] = None, threads: Optional[int] = None) -> PairTrend:
    def evaluate(pair):
        return k_metric(d, pair[0], pair[1], rel_tol, max_level)

    return PairTrend(tuple(run_pool(evaluate, list(pairs), threads)))


def slit_trend(epsilons: Sequence[float] = SLIT_EPSILONS, rel_tol: Optional[float] = None,
               max_level: Optional[int] = None, threads: Optional[int] = None) -> PairTrend:
    trend = pair_trend(build_slit_disc(), [slit_witnesses(eps) for eps in epsilons], rel_tol, max_level, threads)
    for eps, sample in zip(epsilons, trend.rows):
        if sample.k_est + KERR_SLACK * sample.k_err < slit_k_lower_bound(eps):
            raise BoundViolation(f'slit estimate below the winding bound at eps={eps:g}', witness=sample.toRecord())
    return trend


@dataclass(frozen=True)
class WitnessCheck:
    x: Point
    y: Point
    k_est: float
    witness_length: float
    depth: float

    @property
    def holds(self) -> bool:
        return self.k_est <= self.witness_length


def witness_path_check(p: CombParams, pairs: Sequence[Tuple[Point, Point]], rel_tol: Optional[float] = None,
                       depth: Optional[float] = None, threads: Optional[int] = None) -> List[WitnessCheck]:
    """Compare grid estimates of k in the comb with the quasihyperbolic length
    of the explicit tooth-base-tooth path."""
    comb, layout = build_comb(p)

    def check(pair):
        x, y = pair
        drop = depth if depth is not None else min(1.0, max(x.distanceTo(y), p.u ** p.k_max))
        path = comb_witness_path(layout, x, y, drop)
        sample = k_metric(comb, x, y, rel_tol)
        return WitnessCheck(x, y, sample.k_est, qh_length(comb, path), drop)

    return run_pool(check, list(pairs), threads)
