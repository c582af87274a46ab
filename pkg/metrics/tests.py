import csv
import math
import os
import tempfile

import numpy as np
from django.test import SimpleTestCase, tag
from rest_framework.exceptions import ValidationError

from domains.catalog import build_disc, build_half_plane, build_punctured_plane
from geometry.exceptions import InvalidParams, PathExitsDomain, PointNotInterior
from geometry.paths import PolyPath, point_at_length
from geometry.primitives import Point
from metrics.batch import BATCH_COLUMNS, SampleFailure, batch_rows, evaluate_pairs, read_pairs_csv, successful
from metrics.estimators import (
    MetricSample,
    base_grid,
    distance_ratio,
    j_metric,
    k_metric,
    k_oracle_halfplane,
    k_oracle_punctured,
    normalized_partner,
    qh_length,
    quasiconvexity_ratio,
)
from metrics.serializers import sample_to_json


class MetricTestConfiguration:

    @staticmethod
    def generateHalfPlanePairs():
        return [
            (Point(0.0, 1.0), Point(3.0, 1.0)),
            (Point(-1.0, 0.5), Point(1.0, 2.0)),
            (Point(0.5, 3.0), Point(0.5, 0.75)),
        ]

    @staticmethod
    def writePairsCsv(folder, rows):
        path = os.path.join(folder, 'pairs.csv')
        with open(path, 'w', newline='', encoding='utf-8') as handle:
            writer = csv.writer(handle)
            writer.writerow(['x1', 'y1', 'x2', 'y2'])
            writer.writerows(rows)
        return path


class DistanceRatioMetricTests(SimpleTestCase):

    def testHalfPlaneHorizontalPair(self):
        self.assertAlmostEqual(j_metric(build_half_plane(), Point(0.0, 1.0), Point(3.0, 1.0)), math.log(4.0), places=12)

    def testDiscCenterToMidRadius(self):
        self.assertAlmostEqual(j_metric(build_disc(), Point(0.0, 0.0), Point(0.5, 0.0)), math.log(2.0), places=12)

    def testSamePointIsZero(self):
        p = Point(0.3, 0.1)
        self.assertEqual(j_metric(build_disc(), p, p), 0.0)

    def testIsSymmetric(self):
        disc = build_disc()
        x, y = Point(0.1, -0.2), Point(-0.6, 0.3)
        self.assertEqual(j_metric(disc, x, y), j_metric(disc, y, x))
        self.assertEqual(distance_ratio(disc, x, y), distance_ratio(disc, y, x))

    def testBoundaryPointIsRejected(self):
        with self.assertRaises(PointNotInterior):
            j_metric(build_disc(), Point(1.0, 0.0), Point(0.0, 0.0))


class QhLengthTests(SimpleTestCase):

    def setUp(self):
        self.halfPlane = build_half_plane()

    def testVerticalSegment(self):
        path = PolyPath((Point(0.0, 1.0), Point(0.0, math.e)))
        self.assertAlmostEqual(qh_length(self.halfPlane, path), 1.0, delta=1e-6)

    def testHorizontalSegment(self):
        path = PolyPath((Point(0.0, 1.0), Point(3.0, 1.0)))
        self.assertAlmostEqual(qh_length(self.halfPlane, path), 3.0, delta=1e-9)

    def testDegeneratePath(self):
        self.assertEqual(qh_length(self.halfPlane, PolyPath.degenerate(Point(0.0, 1.0))), 0.0)

    def testVertexOutsideIsRejected(self):
        path = PolyPath((Point(0.0, 1.0), Point(0.0, -1.0)))
        with self.assertRaises(PathExitsDomain):
            qh_length(self.halfPlane, path)

    def testSegmentLeavingTheDomainIsRejected(self):
        punctured = build_punctured_plane(0.01, 100.0)
        path = PolyPath((Point(-1.0, 0.0), Point(1.0, 0.0)))
        with self.assertRaises(PathExitsDomain):
            qh_length(punctured, path)

    def testQuasiconvexityOfStraightSegment(self):
        x, y = Point(0.0, 1.0), Point(3.0, 1.0)
        self.assertAlmostEqual(quasiconvexity_ratio(PolyPath((x, y)), x, y), 1.0, places=12)

    def testQuasiconvexityNeedsDistinctPoints(self):
        p = Point(0.0, 1.0)
        with self.assertRaises(InvalidParams):
            quasiconvexity_ratio(PolyPath.degenerate(p), p, p)


class OracleTests(SimpleTestCase):

    def testHalfPlaneOracle(self):
        self.assertAlmostEqual(k_oracle_halfplane(Point(0.0, 1.0), Point(3.0, 1.0)), math.acosh(5.5), places=12)

    def testPuncturedOracleOppositePoints(self):
        self.assertAlmostEqual(k_oracle_punctured(Point(1.0, 0.0), Point(-1.0, 0.0)), math.pi, places=12)

    def testPuncturedOracleQuarterTurn(self):
        self.assertAlmostEqual(k_oracle_punctured(Point(1.0, 0.0), Point(0.0, 1.0)), math.pi / 2.0, places=12)

    def testPuncturedOracleRadialPair(self):
        self.assertAlmostEqual(k_oracle_punctured(Point(1.0, 0.0), Point(math.e, 0.0)), 1.0, places=12)

    def testOraclesRejectBoundaryPoints(self):
        with self.assertRaises(PointNotInterior):
            k_oracle_halfplane(Point(0.0, 0.0), Point(1.0, 1.0))
        with self.assertRaises(PointNotInterior):
            k_oracle_punctured(Point(0.0, 0.0), Point(1.0, 1.0))


class KMetricTests(SimpleTestCase):

    def testHalfPlaneMatchesOracle(self):
        x, y = Point(0.0, 1.0), Point(3.0, 1.0)
        sample = k_metric(build_half_plane(), x, y, rel_tol=0.02)
        self.assertTrue(sample.converged)
        self.assertAlmostEqual(sample.k_est / k_oracle_halfplane(x, y), 1.0, delta=0.02)
        self.assertAlmostEqual(sample.j, math.log(4.0), places=12)

    def testPuncturedPlaneOppositePoints(self):
        sample = k_metric(build_punctured_plane(0.01, 100.0), Point(1.0, 0.0), Point(-1.0, 0.0), rel_tol=0.02)
        self.assertAlmostEqual(sample.k_est / math.pi, 1.0, delta=0.03)

    def testSamePointIsZero(self):
        p = Point(0.2, 0.3)
        sample = k_metric(build_disc(), p, p)
        self.assertEqual((sample.j, sample.k_est, sample.k_err), (0.0, 0.0, 0.0))
        self.assertTrue(sample.geodesic.is_degenerate)

    def testTinyRatioUsesDistanceRatioMetric(self):
        x, y = Point(0.0, 0.0), Point(1e-8, 0.0)
        sample = k_metric(build_disc(), x, y)
        self.assertEqual(sample.k_est, sample.j)
        self.assertEqual(sample.k_err, 0.0)

    def testNormalizedPartnerHasUnitMetrics(self):
        domain = build_half_plane()
        y = Point(0.0, 1.0)
        z = normalized_partner(domain, y)
        self.assertAlmostEqual(z.y, 1.0 / math.e, places=12)
        self.assertAlmostEqual(j_metric(domain, y, z), 1.0, places=12)
        self.assertAlmostEqual(k_oracle_halfplane(y, z), 1.0, places=12)
        self.assertAlmostEqual(k_metric(domain, y, z, rel_tol=0.02).k_est, 1.0, delta=0.02)

    def testEstimatesAgreeWithOracleAndBounds(self):
        domain = build_half_plane()
        for x, y in MetricTestConfiguration.generateHalfPlanePairs():
            sample = k_metric(domain, x, y, rel_tol=0.02)
            exact = k_oracle_halfplane(x, y)
            with self.subTest(x=str(x), y=str(y)):
                self.assertAlmostEqual(sample.k_est / exact, 1.0, delta=0.03)
                self.assertGreaterEqual(sample.k_est, sample.j * (1 - 1e-9))
                self.assertLessEqual(sample.k_est, 2.0 * sample.j * 1.03)

    def testSampleRecord(self):
        sample = k_metric(build_half_plane(), Point(0.0, 1.0), Point(0.0, math.e), rel_tol=0.02)
        record = sample_to_json(sample)
        self.assertNotIn('geodesic', record)
        self.assertEqual(record['x'], [0.0, 1.0])
        self.assertIn('geodesic', sample_to_json(sample, with_geodesic=True))
        self.assertAlmostEqual(sample.kj_ratio, sample.k_est / sample.j, places=12)

    def testBaseGridIsCached(self):
        domain = build_disc()
        first = base_grid(domain)
        second = base_grid(domain)
        self.assertEqual(first.node_count, second.node_count)
        self.assertEqual(first.edge_count, second.edge_count)


class BatchTests(SimpleTestCase):

    def testOrderIsKeptAndFailuresAreReported(self):
        domain = build_half_plane()
        pairs = [
            (Point(0.0, 1.0), Point(3.0, 1.0)),
            (Point(0.0, -1.0), Point(1.0, 1.0)),
            (Point(0.0, 1.0), Point(0.0, math.e)),
        ]
        outcomes = evaluate_pairs(domain, pairs, rel_tol=0.02, threads=2)
        self.assertEqual(len(outcomes), 3)
        self.assertIsInstance(outcomes[0], MetricSample)
        self.assertIsInstance(outcomes[1], SampleFailure)
        self.assertEqual(outcomes[1].toRecord()['error'], 'point_not_interior')
        self.assertEqual(outcomes[2].x, Point(0.0, 1.0))
        self.assertEqual(len(successful(outcomes)), 2)

        rows = batch_rows(outcomes)
        self.assertEqual(len(rows[0]), len(BATCH_COLUMNS))
        self.assertIsNone(rows[1][4])

    def testReadPairsCsv(self):
        with tempfile.TemporaryDirectory() as folder:
            path = MetricTestConfiguration.writePairsCsv(folder, [[0, 1, 3, 1], [0.5, 0.5, 1, 2]])
            pairs = read_pairs_csv(path)
        self.assertEqual(pairs[0], (Point(0.0, 1.0), Point(3.0, 1.0)))
        self.assertEqual(len(pairs), 2)

    def testMalformedCsvIsRejected(self):
        with tempfile.TemporaryDirectory() as folder:
            path = MetricTestConfiguration.writePairsCsv(folder, [[0, 1, 'a', 1]])
            with self.assertRaises(ValidationError):
                read_pairs_csv(path)


class AcceptanceTestConfiguration:

    @staticmethod
    def generateHalfPlanePairs(count, seed=11):
        """Pairs in [-2, 2] x [0.2, 2] whose closed-form k lies in [0.1, 5]."""
        rng = np.random.default_rng(seed)
        pairs = []
        while len(pairs) < count:
            a, b = rng.uniform((-2.0, 0.2), (2.0, 2.0), size=(2, 2))
            x, y = Point(*a), Point(*b)
            if 0.1 <= k_oracle_halfplane(x, y) <= 5.0:
                pairs.append((x, y))
        return pairs

    @staticmethod
    def generatePuncturedPairs(count, seed=12):
        """Pairs with radius in [0.2, 5] whose closed-form k lies in [0.1, 5]."""
        rng = np.random.default_rng(seed)
        pairs = []
        while len(pairs) < count:
            radii = np.exp(rng.uniform(math.log(0.2), math.log(5.0), size=2))
            angles = rng.uniform(-math.pi, math.pi, size=2)
            x, y = (Point(r * math.cos(a), r * math.sin(a)) for r, a in zip(radii, angles))
            if 0.1 <= k_oracle_punctured(x, y) <= 5.0:
                pairs.append((x, y))
        return pairs


@tag('slow')
class OracleAgreementTests(SimpleTestCase):

    def assertAgreesWithOracle(self, domain, pairs, oracle):
        outcomes = evaluate_pairs(domain, pairs, rel_tol=0.02)
        samples = successful(outcomes)
        self.assertEqual(len(samples), len(pairs))
        errors = []
        for sample in samples:
            exact = oracle(sample.x, sample.y)
            errors.append(abs(sample.k_est - exact) / exact)
            self.assertLessEqual(sample.j, sample.k_est + 3.0 * sample.k_err + 1e-9)
        self.assertLessEqual(max(errors), 0.03)
        self.assertLessEqual(sorted(errors)[int(0.95 * len(errors)) - 1], 0.02)

    def testHundredHalfPlanePairs(self):
        pairs = AcceptanceTestConfiguration.generateHalfPlanePairs(100)
        self.assertAgreesWithOracle(build_half_plane(), pairs, k_oracle_halfplane)

    def testHundredPuncturedPlanePairs(self):
        pairs = AcceptanceTestConfiguration.generatePuncturedPairs(100)
        self.assertAgreesWithOracle(build_punctured_plane(0.01, 100.0), pairs, k_oracle_punctured)


class GeodesicAdditivityTests(SimpleTestCase):

    def testSplitOnTheVerticalHalfPlaneGeodesic(self):
        domain = build_half_plane()
        x, z, y = Point(0.0, 0.5), Point(0.0, 0.5 * math.e), Point(0.0, 0.5 * math.e ** 2)
        whole = k_metric(domain, x, y, rel_tol=0.02).k_est
        first = k_metric(domain, x, z, rel_tol=0.02).k_est
        second = k_metric(domain, z, y, rel_tol=0.02).k_est
        self.assertAlmostEqual(whole, 2.0, delta=0.04)
        self.assertAlmostEqual((first + second) / whole, 1.0, delta=0.03)

    def testSplitAtTheMiddleOfADiscGeodesic(self):
        domain = build_disc()
        x, y = Point(-0.6, 0.2), Point(0.5, 0.4)
        sample = k_metric(domain, x, y, rel_tol=0.02)
        z, _ = point_at_length(sample.geodesic, 0.5 * float(sample.geodesic.segmentLengths().sum()))
        first = k_metric(domain, x, z, rel_tol=0.02).k_est
        second = k_metric(domain, z, y, rel_tol=0.02).k_est
        self.assertGreaterEqual((first + second) / sample.k_est, 1.0 - 0.03)
        self.assertLessEqual((first + second) / sample.k_est, 1.0 + 0.03)


class DistanceRatioTriangleTests(SimpleTestCase):

    def testTriangleInequalityOnRandomTriples(self):
        rng = np.random.default_rng(5)
        domains = (
            (build_disc(), lambda: Point(*(rng.uniform(-0.7, 0.7, size=2)))),
            (build_half_plane(), lambda: Point(rng.uniform(-3.0, 3.0), rng.uniform(0.01, 3.0))),
            (build_punctured_plane(0.01, 100.0), lambda: Point(*(rng.uniform(-5.0, 5.0, size=2)))),
        )
        for domain, draw in domains:
            for _ in range(200):
                x, y, z = draw(), draw(), draw()
                with self.subTest(domain=domain.name, x=str(x), y=str(y), z=str(z)):
                    self.assertLessEqual(j_metric(domain, x, z),
                                         j_metric(domain, x, y) + j_metric(domain, y, z) + 1e-12)
