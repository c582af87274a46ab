import math

import numpy as np
from django.test import SimpleTestCase

from domains.catalog import (
    build_disc,
    build_punctured_plane,
    build_slit_disc,
    catalog_domain,
    catalog_names,
    slit_k_lower_bound,
    slit_witnesses,
)
from domains.comb import (
    CombParams,
    build_comb,
    build_comb_complement,
    comb_witness_path,
    ratio_coarse_bound,
)
from geometry.domain import PointClass, segment_inside
from geometry.exceptions import BadTruncation, InvalidParams
from geometry.primitives import Point


class CombTestConfiguration:

    @staticmethod
    def generateParams(k_max=8):
        return CombParams(u=0.2, t=0.4, v=0.7, k_max=k_max)


class CatalogTests(SimpleTestCase):

    def testDiscCenterDistance(self):
        self.assertAlmostEqual(build_disc().delta(Point(0.0, 0.0)), 1.0)

    def testSlitDiscDistance(self):
        self.assertAlmostEqual(build_slit_disc().delta(Point(0.5, 0.3)), 0.3)

    def testPuncturedPlaneDistance(self):
        self.assertAlmostEqual(build_punctured_plane(0.01, 100.0).delta(Point(1.0, 0.0)), 1.0)

    def testPuncturedPlaneNeedsOrderedRadii(self):
        with self.assertRaises(BadTruncation):
            build_punctured_plane(0.5, 0.1)
        with self.assertRaises(BadTruncation):
            build_punctured_plane(0.0, 1.0)

    def testHalfPlaneBoxMustMeetDomain(self):
        with self.assertRaises(BadTruncation):
            catalog_domain('half-plane', box={'xmin': -1, 'xmax': 1, 'ymin': -3, 'ymax': -1})

    def testUnknownNameRaises(self):
        with self.assertRaises(InvalidParams):
            catalog_domain('annulus')

    def testCatalogNames(self):
        self.assertEqual(catalog_names(), sorted([
            'comb', 'comb-complement', 'disc', 'half-plane', 'punctured-plane', 'slit-disc',
        ]))

    def testSlitWitnessesStraddleTheSlit(self):
        above, below = slit_witnesses(0.05)
        domain = build_slit_disc()
        self.assertAlmostEqual(domain.delta(above), 0.05)
        self.assertAlmostEqual(domain.delta(below), 0.05)
        self.assertFalse(segment_inside(domain, above, below))

    def testSlitLowerBoundGrows(self):
        bounds = [slit_k_lower_bound(epsilon) for epsilon in (0.1, 0.05, 0.025, 0.0125)]
        self.assertEqual(bounds, sorted(bounds))
        self.assertGreater(bounds[-1] / math.log(3.0), 10.0)


class CombLayoutTests(SimpleTestCase):

    def setUp(self):
        self.params = CombTestConfiguration.generateParams()
        self.domain, self.layout = build_comb(self.params)

    def testBaseWidth(self):
        self.assertAlmostEqual(self.layout.s, 0.2 / 0.8 + 0.4 / 0.6)
        self.assertAlmostEqual(self.layout.s, 0.9166666666666666)

    def testSecondTooth(self):
        self.assertEqual(self.layout.x_k[0], 0.0)
        self.assertAlmostEqual(self.layout.x_k[1], 0.6)

    def testFirstWitness(self):
        self.assertAlmostEqual(self.layout.z_k[0].x, 0.4)
        self.assertAlmostEqual(self.layout.z_k[0].y, 0.4)

    def testAlpha(self):
        self.assertAlmostEqual(self.params.t ** self.layout.alpha, self.params.v)
        self.assertTrue(0 < self.layout.alpha < 1)

    def test_recurrence_holds_for_every_tooth(self):
        for k in range(1, self.params.k_max + 1):
            step = self.layout.x_k[k] - self.layout.x_k[k - 1]
            self.assertAlmostEqual(step, 0.2 ** k + 0.4 ** k, places=14)

    def test_teeth_fit_inside_base(self):
        last = self.params.k_max
        self.assertLess(self.layout.x_k[last - 1] + 0.2 ** last, self.layout.s)

    def testWitnessDistances(self):
        complement = build_comb_complement(self.params)
        for k, witness in enumerate(self.layout.z_k[:-1], start=1):
            with self.subTest(k=k):
                self.assertAlmostEqual(complement.delta(witness), 0.5 * 0.4 ** k)

    def testInvalidParameterOrder(self):
        with self.assertRaises(InvalidParams):
            CombParams(u=0.4, t=0.2, v=0.7)
        with self.assertRaises(InvalidParams):
            CombParams(u=0.2, t=0.4, v=1.0)
        with self.assertRaises(InvalidParams):
            CombParams(u=0.2, t=0.4, v=0.7, k_max=0)

    def testToothLookup(self):
        self.assertEqual(self.layout.toothContaining(Point(0.1, 0.35)), 1)
        self.assertEqual(self.layout.toothContaining(Point(0.62, 0.5)), 2)
        self.assertIsNone(self.layout.toothContaining(Point(0.4, 0.4)))
        self.assertIsNone(self.layout.toothContaining(Point(0.1, -0.5)))

    def testWitnessPathStaysInside(self):
        start, end = Point(0.1, 0.35), Point(0.62, 0.3)
        path = comb_witness_path(self.layout, start, end, d=1.0)
        self.assertEqual(path.start, start)
        self.assertEqual(path.end, end)
        for a, b in zip(path.vertices, path.vertices[1:]):
            self.assertTrue(segment_inside(self.domain, a, b))

    def testCoarseRatioBound(self):
        self.assertAlmostEqual(ratio_coarse_bound(self.params), 5.25)


class CombComplementTests(SimpleTestCase):

    def setUp(self):
        self.params = CombTestConfiguration.generateParams()
        self.comb, self.layout = build_comb(self.params)
        self.complement = build_comb_complement(self.params, margin=1.0)

    def testWitnessIsInsideComplement(self):
        self.assertEqual(self.complement.classify(Point(0.4, 0.4)), PointClass.INSIDE)

    def testToothPointIsOutsideComplement(self):
        self.assertEqual(self.complement.classify(Point(0.1, 0.35)), PointClass.OUTSIDE)

    def testFirstWitnessDistance(self):
        self.assertGreaterEqual(self.complement.delta(Point(0.4, 0.4)), 0.16)

    def testTruncationBoxIsInflated(self):
        self.assertAlmostEqual(self.complement.box.xmin, -1.0)
        self.assertAlmostEqual(self.complement.box.ymin, -3.0)
        self.assertAlmostEqual(self.complement.box.xmax, self.layout.s + 1.0)
        self.assertTrue(self.complement.unbounded)

    def testMarginMustBePositive(self):
        with self.assertRaises(InvalidParams):
            build_comb_complement(self.params, margin=0.0)

    def test_comb_and_complement_partition_the_box(self):
        generator = np.random.default_rng(5)
        box = self.complement.box
        points = np.column_stack([
            generator.uniform(box.xmin, box.xmax, 2000),
            generator.uniform(box.ymin, box.ymax, 2000),
        ])
        insideComb = self.comb.insideMask(points)
        insideComplement = self.complement.insideMask(points)
        onBoundary = self.comb.chainDistance(points) < self.complement.snap_tolerance
        self.assertFalse((insideComb & insideComplement).any())
        self.assertTrue((insideComb | insideComplement | onBoundary).all())
