import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

from django.conf import settings

from geometry.domain import Domain
from geometry.exceptions import QhGeoError
from geometry.primitives import Point
from metrics.estimators import MetricSample, k_metric

logger = logging.getLogger(__name__)

Pair = Tuple[Point, Point]


@dataclass(frozen=True)
class SampleFailure:
    x: Point
    y: Point
    error: QhGeoError

    def toRecord(self):
        record = self.error.asRecord()
        record.update({'x': list(self.x.asTuple()), 'y': list(self.y.asTuple())})
        return record


Outcome = Union[MetricSample, SampleFailure]


def worker_count(threads: Optional[int] = None) -> int:
    return max(1, int(threads or settings.QHGEO['THREADS']))


def run_pool(task: Callable, items: Sequence, threads: Optional[int] = None) -> List:
    """Map ``task`` over ``items`` on a thread pool; results keep input order."""
    count = worker_count(threads)
    if count == 1 or len(items) <= 1:
        return [task(item) for item in items]
    with ThreadPoolExecutor(max_workers=count) as pool:
        return list(pool.map(task, items))


def evaluate_pairs(d: Domain, pairs: Iterable[Pair], rel_tol: Optional[float] = None,
                   max_level: Optional[int] = None, threads: Optional[int] = None) -> List[Outcome]:
    pairs = list(pairs)

    def evaluate(pair: Pair) -> Outcome:
        x, y = pair
        try:
            return k_metric(d, x, y, rel_tol, max_level)
        except QhGeoError as error:
            logger.warning('skipping pair %s, %s: %s', x, y, error)
            return SampleFailure(x, y, error)

    return run_pool(evaluate, pairs, threads)


def successful(outcomes: Iterable[Outcome]) -> List[MetricSample]:
    return [outcome for outcome in outcomes if isinstance(outcome, MetricSample)]


def read_pairs_csv(path) -> List[Pair]:
    """Point pairs from a CSV file with columns x1, y1, x2, y2."""
    from metrics.serializers import PairRowSerializer

    with open(path, newline='', encoding='utf-8') as handle:
        rows = list(csv.DictReader(handle))
    reader = PairRowSerializer(data=rows, many=True)
    reader.is_valid(raise_exception=True)
    return [(Point(row['x1'], row['y1']), Point(row['x2'], row['y2'])) for row in reader.validated_data]


BATCH_COLUMNS = ['x1', 'y1', 'x2', 'y2', 'j', 'k_est', 'k_err', 'ratio']


def batch_rows(outcomes: Iterable[Outcome]) -> List[List]:
    rows = []
    for outcome in outcomes:
        leading = [outcome.x.x, outcome.x.y, outcome.y.x, outcome.y.y]
        if isinstance(outcome, MetricSample):
            rows.append(leading + [outcome.j, outcome.k_est, outcome.k_err, outcome.ratio])
        else:
            rows.append(leading + [None, None, None, None])
    return rows
