import json
import math

import numpy as np
from django.test import SimpleTestCase
from rest_framework import serializers

from domains.catalog import (
    build_disc,
    build_half_plane,
    build_punctured_plane,
    build_slit_disc,
    catalog_domain,
)
from domains.comb import CombParams, build_comb
from geometry.domain import (
    PointClass,
    boundary_distance,
    check_boundary_chain,
    classify_point,
    segment_inside,
)
from geometry.exceptions import InvalidDomain, InvalidParams, PointNotInterior, VertexNotOnPath
from geometry.paths import PolyPath, path_length, point_at_length, sub_path_lengths
from geometry.primitives import ArcElement, Point, SegmentElement
from geometry.raster import raster_boundary_distance
from geometry.serializers import domain_from_json, domain_to_json
from geometry.svg import render_domain_svg


class GeometryTestConfiguration:

    @staticmethod
    def generateCatalogDomains():
        comb, _ = build_comb(CombParams(u=0.2, t=0.4, v=0.7, k_max=8))
        return {
            'disc': build_disc(),
            'half-plane': build_half_plane(),
            'punctured-plane': build_punctured_plane(0.01, 100.0),
            'slit-disc': build_slit_disc(),
            'comb': comb,
            'comb-complement': catalog_domain('comb-complement', u=0.2, t=0.4, v=0.7, kmax=8),
        }

    @staticmethod
    def generateInteriorSamples(domain, count=200, seed=7):
        generator = np.random.default_rng(seed)
        box = domain.box
        points = np.column_stack([
            generator.uniform(box.xmin, box.xmax, count * 4),
            generator.uniform(box.ymin, box.ymax, count * 4),
        ])
        keep = domain.insideMask(points) & domain.truncationMask(points)
        return points[keep][:count]


class ClassifyPointTests(SimpleTestCase):

    def setUp(self):
        self.disc = build_disc()

    def testCenterIsInside(self):
        self.assertEqual(classify_point(self.disc, Point(0.0, 0.0)), PointClass.INSIDE)

    def testCircleIsBoundary(self):
        self.assertEqual(classify_point(self.disc, Point(1.0, 0.0)), PointClass.BOUNDARY)

    def testFarPointIsOutside(self):
        self.assertEqual(classify_point(self.disc, Point(2.0, 0.0)), PointClass.OUTSIDE)

    def testCombGapIsOutside(self):
        comb, layout = build_comb(CombParams(u=0.2, t=0.4, v=0.7))
        self.assertEqual(classify_point(comb, layout.witness(1)), PointClass.OUTSIDE)
        self.assertEqual(classify_point(comb, Point(0.3, 0.0)), PointClass.BOUNDARY)
        self.assertEqual(classify_point(comb, Point(0.1, 0.35)), PointClass.INSIDE)

    def testSlitIsBoundary(self):
        self.assertEqual(classify_point(build_slit_disc(), Point(0.5, 0.0)), PointClass.BOUNDARY)

    def test_snap_tolerance_scales_with_box(self):
        disc = build_disc()
        self.assertAlmostEqual(disc.snap_tolerance, 1e-9 * math.hypot(2.0, 2.0))
        nearWall = Point(1.0 - 0.5 * disc.snap_tolerance, 0.0)
        self.assertEqual(classify_point(disc, nearWall), PointClass.BOUNDARY)


class BoundaryDistanceTests(SimpleTestCase):

    def setUp(self):
        self.testConfig = GeometryTestConfiguration()
        self.domains = self.testConfig.generateCatalogDomains()

    def testDiscCenter(self):
        self.assertAlmostEqual(boundary_distance(self.domains['disc'], Point(0.0, 0.0)), 1.0)

    def testHalfPlaneHeight(self):
        self.assertAlmostEqual(boundary_distance(self.domains['half-plane'], Point(3.0, 0.25)), 0.25)

    def testCombTooth(self):
        self.assertAlmostEqual(boundary_distance(self.domains['comb'], Point(0.1, 0.35)), 0.1)

    def testSlitDisc(self):
        self.assertAlmostEqual(boundary_distance(self.domains['slit-disc'], Point(0.5, 0.3)), 0.3)
        self.assertAlmostEqual(boundary_distance(self.domains['slit-disc'], Point(0.5, -0.3)), 0.3)

    def testPuncturedPlane(self):
        self.assertAlmostEqual(boundary_distance(self.domains['punctured-plane'], Point(1.0, 0.0)), 1.0)

    def testHalfPlaneIgnoresTruncationBox(self):
        # far from the truncation box the distance is still the height
        self.assertAlmostEqual(boundary_distance(self.domains['half-plane'], Point(40.0, 12.0)), 12.0)

    def testBoundaryPointRaises(self):
        with self.assertRaises(PointNotInterior):
            boundary_distance(self.domains['disc'], Point(0.0, 1.0))
        with self.assertRaises(PointNotInterior):
            boundary_distance(self.domains['disc'], Point(3.0, 0.0))

    def test_agrees_with_raster_transform(self):
        for name, domain in self.domains.items():
            with self.subTest(domain=name):
                raster = raster_boundary_distance(domain, divisions=256)
                centers = raster.pixelCenters()
                keep = domain.insideMask(centers) & domain.truncationMask(centers)
                centers = centers[keep]
                exact = domain.chainDistance(centers)
                approximate = raster.lookup(centers)
                self.assertLessEqual(float(np.max(np.abs(exact - approximate))), 2.0 * raster.pitch)

    def test_open_ball_property(self):
        generator = np.random.default_rng(11)
        for name, domain in self.domains.items():
            samples = self.testConfig.generateInteriorSamples(domain, count=60)
            radii = domain.chainDistance(samples)
            angles = generator.uniform(0.0, 2.0 * math.pi, len(samples))
            scale = 0.99 * generator.uniform(0.0, 1.0, len(samples)) * radii
            moved = samples + np.column_stack([np.cos(angles), np.sin(angles)]) * scale[:, None]
            with self.subTest(domain=name):
                self.assertTrue(domain.insideMask(moved).all())

    def test_inside_test_matches_chain(self):
        for name, domain in self.domains.items():
            samples = self.testConfig.generateInteriorSamples(domain, count=80)
            with self.subTest(domain=name):
                self.assertTrue((domain.chainDistance(samples) > 0).all())
                self.assertTrue(domain.memberMask(samples).all())

    def test_boundary_chain_lies_on_boundary(self):
        for name, domain in self.domains.items():
            with self.subTest(domain=name):
                self.assertTrue(check_boundary_chain(domain))


class SegmentInsideTests(SimpleTestCase):

    def testChordOfDiscIsInside(self):
        self.assertTrue(segment_inside(build_disc(), Point(-0.5, 0.0), Point(0.5, 0.2)))

    def testSegmentAcrossSlitIsRejected(self):
        self.assertFalse(segment_inside(build_slit_disc(), Point(0.5, 0.1), Point(0.5, -0.1)))

    def testSegmentAcrossCombGapIsRejected(self):
        comb, _ = build_comb(CombParams(u=0.2, t=0.4, v=0.7))
        self.assertFalse(segment_inside(comb, Point(0.1, 0.3), Point(0.62, 0.3)))
        self.assertTrue(segment_inside(comb, Point(0.1, -0.5), Point(0.7, -0.5)))


class PathLengthTests(SimpleTestCase):

    def testThreeFourFive(self):
        self.assertAlmostEqual(path_length(PolyPath.fromPoints([(0, 0), (3, 4)])), 5.0)

    def testUnitSteps(self):
        self.assertAlmostEqual(path_length(PolyPath.fromPoints([(0, 0), (1, 0), (1, 1)])), 2.0)

    def testCollinearSubdivision(self):
        self.assertAlmostEqual(path_length(PolyPath.fromPoints([(0, 0), (0, 0.5), (0, 1)])), 1.0)

    def test_additive_under_vertex_insertion(self):
        generator = np.random.default_rng(3)
        for _ in range(20):
            corners = generator.uniform(-1.0, 1.0, size=(5, 2))
            weight = generator.uniform(0.05, 0.95)
            inserted = corners[1] + weight * (corners[2] - corners[1])
            refined = np.vstack([corners[:2], inserted, corners[2:]])
            self.assertAlmostEqual(path_length(PolyPath.fromPoints(corners)),
                                   path_length(PolyPath.fromPoints(refined)), places=12)

    def testDegeneratePathHasZeroLength(self):
        path = PolyPath.degenerate(Point(0.2, 0.3))
        self.assertTrue(path.is_degenerate)
        self.assertEqual(path_length(path), 0.0)

    def testRepeatedVerticesAreRejected(self):
        with self.assertRaises(InvalidParams):
            PolyPath((Point(0, 0), Point(1, 0), Point(1, 0)))

    def testPointAtLength(self):
        path = PolyPath.fromPoints([(0, 0), (1, 0), (1, 1)])
        point, index = point_at_length(path, 1.5)
        self.assertEqual(index, 1)
        self.assertAlmostEqual(point.x, 1.0)
        self.assertAlmostEqual(point.y, 0.5)


class SubPathLengthTests(SimpleTestCase):

    def setUp(self):
        self.straight = PolyPath.fromPoints([(0, 0), (1, 0), (2, 0)])

    def testMidpoint(self):
        self.assertEqual(sub_path_lengths(self.straight, Point(1, 0)), (1.0, 1.0))

    def testEndpoint(self):
        self.assertEqual(sub_path_lengths(self.straight, Point(0, 0)), (0.0, 2.0))

    def testVertexSplit(self):
        path = PolyPath.fromPoints([(0, 0), (0, 1), (1, 1), (1, 2)])
        self.assertEqual(sub_path_lengths(path, Point(1, 1)), (2.0, 1.0))

    def testNonVertexRaises(self):
        with self.assertRaises(VertexNotOnPath):
            sub_path_lengths(self.straight, Point(0.5, 0.0))


class BoundaryElementTests(SimpleTestCase):

    def testSegmentEndpointsMustDiffer(self):
        with self.assertRaises(InvalidDomain):
            SegmentElement(Point(0, 0), Point(0, 0))

    def testArcRadiusMustBePositive(self):
        with self.assertRaises(InvalidDomain):
            ArcElement(Point(0, 0), 0.0, 0.0, 1.0)

    def testUpperArcDistances(self):
        arc = ArcElement(Point(0, 0), 1.0, math.pi, 0.0, ccw=False)
        self.assertAlmostEqual(arc.sweep, math.pi)
        distances = arc.distances(np.array([[0.0, 0.5], [0.0, -0.5]]))
        self.assertAlmostEqual(distances[0], 0.5)
        self.assertAlmostEqual(distances[1], math.hypot(1.0, 0.5))

    def testFullCircleSweep(self):
        self.assertAlmostEqual(ArcElement(Point(0, 0), 2.0, 0.0, 0.0).sweep, 2.0 * math.pi)


class DomainSpecTests(SimpleTestCase):

    def setUp(self):
        self.testConfig = GeometryTestConfiguration()

    def testCatalogDomainsRoundTrip(self):
        for name, domain in self.testConfig.generateCatalogDomains().items():
            document = json.loads(json.dumps(domain_to_json(domain)))
            with self.subTest(domain=name):
                self.assertEqual(domain_from_json(document), domain)

    def testCatalogOnlyDocument(self):
        domain = domain_from_json({'catalog': {'name': 'comb', 'u': 0.2, 't': 0.4, 'v': 0.7, 'kmax': 3}})
        self.assertEqual(domain.metadata['kmax'], 3)
        self.assertAlmostEqual(domain.delta(Point(0.1, 0.35)), 0.1)

    def testMissingBoxIsRejected(self):
        document = domain_to_json(build_disc())
        document.pop('bbox')
        with self.assertRaises(serializers.ValidationError):
            domain_from_json(document)

    def testIncompletePrimitiveIsRejected(self):
        document = domain_to_json(build_disc())
        document['primitives'] = [{'kind': 'disc', 'center': [0, 0]}]
        with self.assertRaises(serializers.ValidationError):
            domain_from_json(document)

    def testUnknownCatalogNameIsRejected(self):
        with self.assertRaises(serializers.ValidationError):
            domain_from_json({'catalog': {'name': 'annulus'}})

    def testSvgOutlineIsDeterministic(self):
        comb, layout = build_comb(CombParams(u=0.2, t=0.4, v=0.7, k_max=4))
        first = render_domain_svg(comb, markers=list(layout.z_k))
        second = render_domain_svg(comb, markers=list(layout.z_k))
        self.assertTrue(first.lstrip().startswith('<?xml'))
        self.assertIn('<svg', first)
        self.assertEqual(first, second)
