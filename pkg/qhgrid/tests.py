import csv
import math
import os
import tempfile

import numpy as np
from django.test import SimpleTestCase

from domains.catalog import build_disc, build_half_plane, build_punctured_plane, build_slit_disc
from domains.comb import CombParams, build_comb
from geometry.domain import Domain, PointClass, segment_inside
from geometry.exceptions import (
    Disconnected,
    EmptyGrid,
    InvalidParams,
    NoConvergence,
    PointNotInjected,
    PointNotInterior,
)
from geometry.paths import PolyPath
from geometry.primitives import ArcElement, Box, Disc, Point
from qhgrid.grid import build_grid, carry_path, dump_grid_csv, inject_points, shortest_path
from qhgrid.quadrature import polyline_qh_length, segment_qh_lengths
from qhgrid.refinement import refine_pair, refine_until


class GridTestConfiguration:

    @staticmethod
    def generateBaseGrid(domain, stencil=16):
        return build_grid(domain, domain.box.diagonal() / 16.0, stencil)

    @staticmethod
    def generateEdgeBounds(grid):
        starts = grid.nodes[grid.edges[:, 0]]
        ends = grid.nodes[grid.edges[:, 1]]
        lengths = np.linalg.norm(ends - starts, axis=1)
        largest = np.maximum(grid.deltas[grid.edges[:, 0]], grid.deltas[grid.edges[:, 1]])
        return starts, ends, lengths / largest

    @staticmethod
    def generateTwoDiscs():
        left, right = Point(-2.0, 0.0), Point(2.0, 0.0)
        return Domain(
            name='two discs',
            primitives=(Disc(left, 1.0), Disc(right, 1.0)),
            boundary=(ArcElement(left, 1.0, 0.0, 0.0), ArcElement(right, 1.0, 0.0, 0.0)),
            box=Box(-3.0, 3.0, -1.0, 1.0),
        )


class QuadratureTests(SimpleTestCase):

    def setUp(self):
        self.halfPlane = build_half_plane()

    def testVerticalSegment(self):
        value = segment_qh_lengths(self.halfPlane, [[0.0, 1.0]], [[0.0, math.e]])[0]
        self.assertAlmostEqual(value, 1.0, delta=1e-6)

    def testHorizontalSegment(self):
        value = segment_qh_lengths(self.halfPlane, [[0.0, 1.0]], [[3.0, 1.0]])[0]
        self.assertAlmostEqual(value, 3.0, delta=1e-9)

    def testDegenerateSegment(self):
        self.assertEqual(segment_qh_lengths(self.halfPlane, [[0.0, 1.0]], [[0.0, 1.0]])[0], 0.0)

    def testPolylineIsSumOfPieces(self):
        vertices = np.array([[0.0, 1.0], [1.0, 2.0], [3.0, 1.5]])
        pieces = segment_qh_lengths(self.halfPlane, vertices[:-1], vertices[1:])
        self.assertAlmostEqual(polyline_qh_length(self.halfPlane, vertices), float(pieces.sum()), places=12)


class BuildGridTests(SimpleTestCase):

    def testHalfPlaneNodesAreInterior(self):
        grid = build_grid(build_half_plane(), 0.5)
        self.assertGreater(grid.node_count, 0)
        self.assertTrue((grid.deltas > 0).all())
        self.assertTrue(grid.domain.insideMask(grid.nodes).all())

    def testEightStencilDegree(self):
        grid = build_grid(build_disc(), 0.25, stencil=8)
        self.assertEqual(int(grid.degrees().max()), 8)

    def testSixteenStencilDegree(self):
        grid = build_grid(build_disc(), 0.25, stencil=16)
        degrees = grid.degrees()
        self.assertLessEqual(int(degrees.max()), 16)
        self.assertGreater(int(degrees.max()), 8)

    def testEdgesStayInside(self):
        grid = build_grid(build_disc(), 0.25, stencil=16)
        starts = grid.nodes[grid.edges[:, 0]]
        ends = grid.nodes[grid.edges[:, 1]]
        self.assertTrue(grid.domain.segmentInsideMask(starts, ends).all())
        self.assertTrue((grid.weights > 0).all())

    def testCurvedBoundaryWeightsBoundedByLargestEndpointDistance(self):
        for domain in (build_disc(), build_slit_disc()):
            with self.subTest(domain=domain.name):
                grid = build_grid(domain, 0.25, stencil=16)
                _, _, bound = GridTestConfiguration.generateEdgeBounds(grid)
                self.assertTrue((grid.weights >= bound * (1 - 1e-12)).all())

    def testInjectedEdgesKeepTheBound(self):
        grid = inject_points(build_grid(build_slit_disc(), 0.25), [Point(0.5, 0.01), Point(0.5, -0.01)])
        _, _, bound = GridTestConfiguration.generateEdgeBounds(grid)
        self.assertTrue((grid.weights >= bound * (1 - 1e-12)).all())

    def testWeightsBoundedByLargestEndpointDistance(self):
        grid = build_grid(build_half_plane(), 0.5)
        starts, ends, bound = GridTestConfiguration.generateEdgeBounds(grid)
        self.assertTrue((grid.weights >= bound * (1 - 1e-12)).all())
        self.assertTrue((grid.weights >= segment_qh_lengths(grid.domain, starts, ends) * (1 - 1e-12)).all())

    def testEveryCombToothHoldsANode(self):
        params = CombParams(u=0.2, t=0.4, v=0.7, k_max=4)
        comb, layout = build_comb(params)
        grid = build_grid(comb, 0.02)
        for k in range(1, 5):
            left = layout.x_k[k - 1]
            inTooth = ((grid.nodes[:, 0] > left) & (grid.nodes[:, 0] < left + params.u ** k)
                       & (grid.nodes[:, 1] >= 0.0) & (grid.nodes[:, 1] <= params.v ** k))
            with self.subTest(tooth=k):
                self.assertTrue(inTooth.any())

    def testInvalidStencil(self):
        with self.assertRaises(InvalidParams):
            build_grid(build_disc(), 0.25, stencil=12)

    def testNonPositivePitch(self):
        with self.assertRaises(InvalidParams):
            build_grid(build_disc(), 0.0)

    def testBoxMissingTheDomain(self):
        stray = Domain(
            name='stray box',
            primitives=(Disc(Point(0.0, 0.0), 1.0),),
            boundary=(ArcElement(Point(0.0, 0.0), 1.0, 0.0, 0.0),),
            box=Box(10.0, 11.0, 10.0, 11.0),
        )
        with self.assertRaises(EmptyGrid):
            build_grid(stray, 0.25)

    def testCsvDump(self):
        grid = build_grid(build_disc(), 0.5, stencil=8)
        with tempfile.TemporaryDirectory() as folder:
            nodePath = os.path.join(folder, 'nodes.csv')
            edgePath = os.path.join(folder, 'edges.csv')
            dump_grid_csv(grid, nodePath, edgePath)
            with open(nodePath, newline='') as handle:
                rows = list(csv.reader(handle))
            self.assertEqual(rows[0], ['node_id', 'x', 'y', 'delta'])
            self.assertEqual(len(rows) - 1, grid.node_count)
            with open(edgePath, newline='') as handle:
                self.assertEqual(len(list(csv.reader(handle))) - 1, grid.edge_count)


class InjectPointsTests(SimpleTestCase):

    def setUp(self):
        self.grid = build_grid(build_half_plane(), 0.5)

    def testInjectingExistingNodeIsIdempotent(self):
        existing = self.grid.nodePoint(0)
        self.assertIs(inject_points(self.grid, [existing]), self.grid)

    def testInjectingTwiceIsIdempotent(self):
        p = Point(0.123, 0.777)
        once = inject_points(self.grid, [p])
        twice = inject_points(once, [p])
        self.assertEqual(once.node_count, self.grid.node_count + 1)
        self.assertIs(twice, once)

    def testPointNearWallConnectsThroughVisibleEdges(self):
        p = Point(0.31, 0.05)
        grid = inject_points(self.grid, [p])
        index = grid.nodeId(p)
        incident = grid.edges[(grid.edges == index).any(axis=1)]
        self.assertGreater(len(incident), 0)
        for first, second in incident:
            self.assertTrue(segment_inside(grid.domain, grid.nodePoint(first), grid.nodePoint(second)))

    def testOutsidePointIsRejected(self):
        with self.assertRaises(PointNotInterior):
            inject_points(self.grid, [Point(0.0, -1.0)])

    def testUnknownPointHasNoNode(self):
        with self.assertRaises(PointNotInjected):
            shortest_path(self.grid, Point(0.123, 0.456), Point(1.0, 1.0))


class ShortestPathTests(SimpleTestCase):

    def setUp(self):
        self.disc = build_disc()
        self.x = Point(0.13, 0.21)
        self.y = Point(-0.37, 0.44)
        base = GridTestConfiguration.generateBaseGrid(self.disc)
        self.grid = inject_points(base, [self.x, self.y])

    def testSamePointIsDegenerate(self):
        weight, path = shortest_path(self.grid, self.x, self.x)
        self.assertEqual(weight, 0.0)
        self.assertTrue(path.is_degenerate)

    def testWeightIsSymmetric(self):
        forward, _ = shortest_path(self.grid, self.x, self.y)
        backward, _ = shortest_path(self.grid, self.y, self.x)
        self.assertEqual(forward, backward)

    def testPathMatchesQuadratureLength(self):
        weight, path = shortest_path(self.grid, self.x, self.y)
        self.assertEqual(path.start, self.x)
        self.assertEqual(path.end, self.y)
        for vertex in path.vertices:
            self.assertEqual(self.disc.classify(vertex), PointClass.INSIDE)
        quadrature = polyline_qh_length(self.disc, path.asArray())
        self.assertLessEqual(quadrature, weight * (1 + 1e-12))
        self.assertAlmostEqual(quadrature / weight, 1.0, delta=0.05)

    def testCarriedPathIsNeverBeaten(self):
        carried = PolyPath.fromPoints([self.x, Point(0.0, 0.7), self.y])
        weight, _ = shortest_path(carry_path(self.grid, carried), self.x, self.y)
        self.assertLessEqual(weight, polyline_qh_length(self.disc, carried.asArray()) * (1 + 1e-12))

    def testCarryingAGridPathChangesNothing(self):
        weight, path = shortest_path(self.grid, self.x, self.y)
        carried = carry_path(self.grid, path)
        self.assertEqual(carried.node_count, self.grid.node_count)
        self.assertLessEqual(shortest_path(carried, self.x, self.y)[0], weight * (1 + 1e-12))

    def testSeparateComponentsAreDisconnected(self):
        domain = GridTestConfiguration.generateTwoDiscs()
        left, right = Point(-2.1, 0.1), Point(2.1, -0.1)
        grid = inject_points(build_grid(domain, 0.25), [left, right])
        with self.assertRaises(Disconnected):
            shortest_path(grid, left, right)


class RefineUntilTests(SimpleTestCase):

    def testHalfPlaneHorizontalPair(self):
        domain = build_half_plane()
        base = GridTestConfiguration.generateBaseGrid(domain)
        estimate, path, err = refine_until(base, Point(0.0, 1.0), Point(3.0, 1.0), rel_tol=0.02)
        expected = math.acosh(5.5)
        self.assertAlmostEqual(estimate / expected, 1.0, delta=0.02)
        self.assertGreaterEqual(err, 0.0)
        self.assertAlmostEqual(polyline_qh_length(domain, path.asArray()) / estimate, 1.0, delta=1e-9)

    def testPuncturedPlaneQuarterTurn(self):
        domain = build_punctured_plane(0.01, 100.0)
        base = GridTestConfiguration.generateBaseGrid(domain)
        estimate, _, _ = refine_until(base, Point(1.0, 0.0), Point(0.0, 1.0), rel_tol=0.02)
        self.assertAlmostEqual(estimate / (math.pi / 2.0), 1.0, delta=0.02)

    def testSamePointAtLevelZero(self):
        base = GridTestConfiguration.generateBaseGrid(build_disc())
        result = refine_pair(base, Point(0.2, 0.2), Point(0.2, 0.2), rel_tol=0.02)
        self.assertEqual(result.asTriple()[0], 0.0)
        self.assertEqual(result.err_est, 0.0)
        self.assertEqual(result.level, 0)

    def assertHistoryNeverIncreases(self, history):
        for level in range(len(history) - 1):
            self.assertLessEqual(history[level + 1], history[level] + 1e-12, msg=f'level {level + 1}')

    def testEstimatesNeverIncreaseAcrossLevels(self):
        domain = build_half_plane()
        base = GridTestConfiguration.generateBaseGrid(domain)
        result = refine_pair(base, Point(-1.0, 0.5), Point(1.5, 2.0), rel_tol=0.02)
        self.assertHistoryNeverIncreases(result.history)
        self.assertEqual(result.estimate, result.history[-1])

    def testDiscEstimatesNeverIncreaseUnderTightTolerance(self):
        domain = build_disc()
        base = GridTestConfiguration.generateBaseGrid(domain)
        for x, y in ((Point(0.0, 0.0), Point(0.9, 0.0)), (Point(0.5, 0.5), Point(-0.6, 0.3))):
            with self.subTest(x=x, y=y):
                try:
                    history = refine_pair(base, x, y, rel_tol=1e-6, max_level=3).history
                except NoConvergence as error:
                    history = error.result.history
                self.assertHistoryNeverIncreases(history)

    def testNonPositiveToleranceIsRejected(self):
        base = GridTestConfiguration.generateBaseGrid(build_disc())
        with self.assertRaises(InvalidParams):
            refine_until(base, Point(0.0, 0.0), Point(0.5, 0.0), rel_tol=0.0)
