import math

from django.test import SimpleTestCase, TestCase, tag

from domains.catalog import (
    SLIT_EPSILONS,
    build_disc,
    build_half_plane,
    build_punctured_plane,
    build_slit_disc,
    slit_k_lower_bound,
)
from domains.comb import CombParams, build_comb, gap_length_lower_bound
from geometry.exceptions import BoundViolation, InvalidParams, SingularMap
from geometry.paths import PolyPath
from geometry.primitives import Box, Point
from metrics.estimators import MetricSample, k_metric, k_oracle_halfplane
from analysis.experiments import (
    CombDivergenceReport,
    CombDivergenceRow,
    box_clearance,
    comb_divergence,
    log_envelope_fit,
    slit_trend,
)
from analysis.ledger import record_run
from analysis.mobius import CAYLEY, IDENTITY, MobiusMap, image_shape, mobius_bilipschitz_check
from analysis.models import ExperimentRun, RunStatusOptions
from analysis.plots import comb_divergence_svg, envelope_svg
from analysis.profiles import (
    check_comb_phi,
    growsWithoutCeiling,
    john_from_samples,
    monotone_envelope,
    path_john_constant,
    phi_from_eta,
    profile_from_samples,
    sampled_metrics,
    theorem12_constant_chain,
    twisted_path_split,
    uniformity_from_samples,
)
from analysis.quasisymmetry import measure_triple, normalized_triple, qs_identity_sampler
from analysis.samplers import make_rng, sample_pairs, sample_triples


class AnalysisTestConfiguration:

    @staticmethod
    def generateSample(x, y, j, k_est, ratio, k_err=0.0, geodesic=None):
        return MetricSample(x=x, y=y, j=j, k_est=k_est, k_err=k_err, ratio=ratio,
                            geodesic=geodesic or PolyPath((x, y)))

    @staticmethod
    def generateBentSamples(heights):
        """Half-plane samples whose geodesic bends through (0, h); the path
        John constant of each is 1 / h."""
        samples = []
        for h in heights:
            x, y = Point(-1.0, h), Point(1.0, h)
            path = PolyPath((x, Point(0.0, h), y))
            samples.append(AnalysisTestConfiguration.generateSample(x, y, 1.0, 1.0, 1.0, geodesic=path))
        return samples

    @staticmethod
    def generateSmallComb():
        return CombParams(u=0.2, t=0.4, v=0.7, k_max=4)


class SamplerTests(SimpleTestCase):

    def testSameSeedSamePairs(self):
        disc = build_disc()
        first = sample_pairs(disc, 5, 'uniform', make_rng(7))
        second = sample_pairs(disc, 5, 'uniform', make_rng(7))
        self.assertEqual(first, second)

    def testBoundaryBiasedPairsAreInterior(self):
        halfPlane = build_half_plane()
        for x, y in sample_pairs(halfPlane, 20, 'boundary-biased', make_rng(3)):
            self.assertTrue(halfPlane.insideMask([x.asTuple(), y.asTuple()]).all())
            self.assertLessEqual(y.y, x.y + 1e-12)

    def testPuncturedSamplesRespectTruncation(self):
        punctured = build_punctured_plane(0.5, 2.0)
        for x, y, z in sample_triples(punctured, 10, make_rng(1)):
            for p in (x, y, z):
                self.assertGreaterEqual(math.hypot(p.x, p.y), 0.5)

    def testUnknownSampler(self):
        with self.assertRaises(InvalidParams):
            sample_pairs(build_disc(), 3, 'gaussian')

    def testNeedsAtLeastOneSample(self):
        with self.assertRaises(InvalidParams):
            sample_pairs(build_disc(), 0)


class EnvelopeTests(SimpleTestCase):

    def testEnvelopeIsMonotone(self):
        bins = monotone_envelope([0.1, 1.0, 10.0, 0.5], [3.0, 1.0, 5.0, 0.5], n_bins=8)
        values = [value for _, value in bins]
        self.assertEqual(values, sorted(values))
        self.assertEqual(values[-1], 5.0)
        self.assertEqual(bins[-1][0], 10.0)
        self.assertEqual(bins[0], (0.1, 3.0))

    def testCoincidentPairGivesZeroEnvelope(self):
        p = Point(0.2, 0.1)
        profile = profile_from_samples([k_metric(build_disc(), p, p)])
        self.assertEqual(profile.bins, ((0.0, 0.0),))
        self.assertEqual(profile(0.0), 0.0)
        self.assertEqual(profile.sample_count, 1)

    def testProfileLookup(self):
        samples = [
            AnalysisTestConfiguration.generateSample(Point(0, 0.5), Point(0, 1), 0.69, 0.7, 1.0),
            AnalysisTestConfiguration.generateSample(Point(0, 0.5), Point(0, 2), 1.39, 1.4, 3.0),
        ]
        profile = profile_from_samples(samples)
        self.assertEqual(profile(0.5), 0.7)
        self.assertEqual(profile(3.0), 1.4)
        self.assertGreaterEqual(profile(30.0), 1.4)

    def testPhiFromEta(self):
        phi = phi_from_eta(((1.0, 2.0), (2.0, 3.0)))
        self.assertEqual(phi(math.e - 1.0 - 1e-12), 2.0)
        self.assertEqual(phi(math.e ** 2 - 1.0 - 1e-9), 3.0)

    def testEmptyEnvelopeIsRejected(self):
        with self.assertRaises(InvalidParams):
            phi_from_eta(())


class ConstantChainTests(SimpleTestCase):

    def testMiddleTerm(self):
        chain = theorem12_constant_chain(lambda ratio: ratio, 1.0)
        middle = 12.0 / math.log(1.5)
        self.assertAlmostEqual(middle, 29.5956, places=3)
        self.assertGreater(chain, middle)
        self.assertAlmostEqual(chain, middle + 2.0 * (2.0 / math.log(1.5) + 1.0), places=9)

    def testEndTermsNeverDropBelowTwo(self):
        chain = theorem12_constant_chain(lambda ratio: 0.0, 1e-6)
        self.assertGreaterEqual(chain, 4.0)

    def testNonPositiveCIsRejected(self):
        with self.assertRaises(InvalidParams):
            theorem12_constant_chain(lambda ratio: ratio, 0.0)

    def testDiscUniformityBelowChain(self):
        disc = build_disc()
        samples, _ = sampled_metrics(disc, 4, 'uniform', 0.02, seed=11, threads=1)
        uniformity = uniformity_from_samples(disc, samples)
        profile = profile_from_samples(samples)
        john = john_from_samples(disc, samples)
        chain = theorem12_constant_chain(profile, max(john.c_est, 1e-3))
        self.assertLessEqual(uniformity.sup_ratio_kj, chain)
        self.assertLessEqual(uniformity.sup_ratio_kj, 2.0 * 1.03)


class UniformityTests(SimpleTestCase):

    def testWitnessIsTheWorstPair(self):
        disc = build_disc()
        generate = AnalysisTestConfiguration.generateSample
        samples = [
            generate(Point(0.0, 0.0), Point(0.5, 0.0), 1.0, 1.5, 1.0),
            generate(Point(0.0, 0.0), Point(0.0, 0.5), 1.0, 1.2, 1.0),
            generate(Point(0.1, 0.1), Point(0.1, 0.1), 0.0, 0.0, 0.0),
        ]
        report = uniformity_from_samples(disc, samples)
        self.assertEqual(report.sup_ratio_kj, 1.5)
        self.assertEqual(report.witness, (Point(0.0, 0.0), Point(0.5, 0.0)))
        self.assertEqual(report.samples, 2)
        self.assertFalse(report.unbounded_trend)

    def testTrendFlag(self):
        depths = [1.0, 0.9, 0.5, 0.4, 0.1, 0.09, 0.01, 0.009]
        self.assertTrue(growsWithoutCeiling(depths, [1.0, 1.0, 2.0, 2.0, 4.0, 4.0, 8.0, 8.0]))
        self.assertFalse(growsWithoutCeiling(depths, [1.0, 1.0, 1.1, 1.1, 1.0, 1.2, 1.1, 1.1]))

    def testCombPhiCheck(self):
        params = AnalysisTestConfiguration.generateSmallComb()
        generate = AnalysisTestConfiguration.generateSample
        inside = generate(Point(0.1, 0.2), Point(0.1, 0.4), 0.7, 1.0, 1.0)
        self.assertEqual(check_comb_phi([inside], params.alpha), 1)
        outside = generate(Point(0.1, 0.2), Point(0.1, 0.4), 0.7, 100.0, 1.0)
        with self.assertRaises(BoundViolation):
            check_comb_phi([inside, outside], params.alpha)


class JohnTests(SimpleTestCase):

    def testStraightPathInsideATooth(self):
        comb, _ = build_comb(AnalysisTestConfiguration.generateSmallComb())
        path = PolyPath((Point(0.1, 0.2), Point(0.1, 0.3), Point(0.1, 0.4)))
        value, z = path_john_constant(comb, path)
        self.assertAlmostEqual(value, 1.0, places=9)
        self.assertEqual(z, Point(0.1, 0.3))

    def testTwoVertexPathContributesNothing(self):
        value, z = path_john_constant(build_disc(), PolyPath((Point(0.0, 0.0), Point(0.5, 0.0))))
        self.assertEqual(value, 0.0)
        self.assertIsNone(z)

    def testJohnConstantGrowingWithDepthIsFlagged(self):
        samples = AnalysisTestConfiguration.generateBentSamples([2.0 ** -i for i in range(8)])
        report = john_from_samples(build_half_plane(), samples)
        self.assertAlmostEqual(report.c_est, 128.0, places=9)
        self.assertTrue(report.unbounded_trend)
        self.assertTrue(report.toRecord()['unbounded_trend'])

    def testSteadyJohnConstantIsNotFlagged(self):
        samples = AnalysisTestConfiguration.generateBentSamples([0.5] * 8)
        report = john_from_samples(build_half_plane(), samples)
        self.assertAlmostEqual(report.c_est, 2.0, places=9)
        self.assertFalse(report.unbounded_trend)

    def testTooFewSamplesGiveNoTrend(self):
        samples = AnalysisTestConfiguration.generateBentSamples([1.0, 0.1, 0.01])
        self.assertFalse(john_from_samples(build_half_plane(), samples).unbounded_trend)

    def testTwistedSplitOfADiameter(self):
        split = twisted_path_split(build_disc(), PolyPath((Point(-0.5, 0.0), Point(0.5, 0.0))), 1.0)
        self.assertAlmostEqual(split.x_prime.x, -0.4, places=12)
        self.assertAlmostEqual(split.y_prime.x, 0.4, places=12)
        self.assertAlmostEqual(split.min_delta, 0.6, places=9)
        self.assertTrue(split.holds)


class MobiusTests(SimpleTestCase):

    def testSingularMap(self):
        with self.assertRaises(SingularMap):
            MobiusMap.fromCoefficients((1, 1, 1, 1))

    def testCayleySendsDiscToUpperHalfPlane(self):
        shape = image_shape(build_disc(), MobiusMap.fromCoefficients(CAYLEY))
        self.assertEqual(shape.kind, 'half-plane')
        self.assertAlmostEqual(shape.normal.x, 0.0, places=9)
        self.assertAlmostEqual(shape.normal.y, 1.0, places=9)
        self.assertAlmostEqual(shape.point.y, 0.0, places=9)

    def testSimilaritySendsDiscToDisc(self):
        shape = image_shape(build_disc(), MobiusMap.fromCoefficients((2, 1, 0, 1)))
        self.assertEqual(shape.kind, 'disc')
        self.assertAlmostEqual(shape.point.x, 1.0, places=9)
        self.assertAlmostEqual(shape.point.y, 0.0, places=9)
        self.assertAlmostEqual(shape.radius, 2.0, places=9)

    def testIdentityImageIsTheDisc(self):
        shape = image_shape(build_disc(), MobiusMap.fromCoefficients(IDENTITY))
        self.assertEqual(shape.kind, 'disc')
        self.assertAlmostEqual(shape.radius, 1.0, places=9)

    def testSimilarityDistortion(self):
        report = mobius_bilipschitz_check((2, 1, 0, 1), build_disc(), 2, rel_tol=0.02, seed=5, threads=1)
        self.assertEqual(report.samples, 2)
        self.assertLessEqual(report.j_distortion, 1.0 + 1e-9)
        self.assertLessEqual(report.k_distortion, 1.0 + 3 * 0.02)

    def testCayleyDistortion(self):
        report = mobius_bilipschitz_check(CAYLEY, build_disc(), 3, rel_tol=0.02, seed=9, threads=1)
        self.assertLessEqual(report.k_distortion, 2.0 * (1.0 + 3 * 0.02))
        self.assertLessEqual(report.j_distortion, 2.0 * (1.0 + 3 * 0.02))


class QuasisymmetryTests(SimpleTestCase):

    def testNormalizedTripleInHalfPlane(self):
        halfPlane = build_half_plane()
        triple = normalized_triple(halfPlane, Point(1.0, 1.0), Point(0.0, 1.0), rel_tol=0.02)
        self.assertAlmostEqual(triple.z.y, 1.0 / math.e, places=12)
        self.assertAlmostEqual(triple.j_yz, 1.0, delta=1e-6)
        self.assertAlmostEqual(k_oracle_halfplane(triple.y, triple.z), 1.0, delta=1e-6)
        self.assertAlmostEqual(triple.k_yz, 1.0, delta=0.02)
        self.assertTrue(triple.normalized)

    def testDegenerateTripleIsSkipped(self):
        p = Point(0.1, 0.1)
        self.assertIsNone(measure_triple(build_disc(), p, p, Point(0.3, 0.0)))

    def testSamplerEnvelope(self):
        envelope = qs_identity_sampler(build_disc(), 2, rel_tol=0.02, seed=4, threads=1)
        self.assertEqual(len(envelope.triples) + envelope.skipped, 4)
        values = [value for _, value in envelope.bins]
        self.assertEqual(values, sorted(values))
        self.assertTrue(all(math.isfinite(value) for value in values))


class CombDivergenceTests(SimpleTestCase):

    def setUp(self):
        self.params = AnalysisTestConfiguration.generateSmallComb()

    def testRowsMeetTheirBounds(self):
        report = comb_divergence(self.params, [1, 2], rel_tol=0.02, threads=1)
        rows = report.rows
        self.assertEqual([row.k_index for row in rows], [1, 2])
        self.assertAlmostEqual(rows[0].k_lower_bound, math.log(2.5), places=12)
        self.assertAlmostEqual(rows[0].j_paper_bound, math.log(6.25), places=12)
        self.assertAlmostEqual(rows[0].j_val, math.log(6.0), places=9)
        for row in rows:
            self.assertLessEqual(row.j_val, row.j_paper_bound)
            self.assertGreaterEqual(row.k_est, gap_length_lower_bound(self.params, row.k_index))
        self.assertTrue(report.increasing)
        self.assertGreater(report.clearance, 0.5 * report.margin)
        self.assertIn('u^4', report.truncation_note)
        self.assertIn('<svg', comb_divergence_svg(self.params, rows))

    def testThreeGapsGiveTheDivergenceVerdict(self):
        # one closed tooth past the last gap
        params = CombParams(u=0.2, t=0.4, v=0.7, k_max=5)
        report = comb_divergence(params, [1, 2, 3], rel_tol=0.02, threads=1)
        self.assertTrue(report.exceeds_fit)
        self.assertTrue(report.not_psi_uniform)
        record = report.toRecord()
        self.assertEqual(len(record['rows']), 3)
        self.assertTrue(record['not_psi_uniform'])
        self.assertIn('truncation_note', record)

    def testRangeMustStayInsideTheTeeth(self):
        with self.assertRaises(InvalidParams):
            comb_divergence(self.params, [4])
        with self.assertRaises(InvalidParams):
            comb_divergence(self.params, [])


class CombDivergenceReportTests(SimpleTestCase):

    @staticmethod
    def generateRow(k, j_val, k_est):
        return CombDivergenceRow(k_index=k, j_val=j_val, j_paper_bound=2.0, k_est=k_est, k_err=0.0,
                                 k_lower_bound=0.0, ratio_kj=k_est / j_val)

    def generateReport(self, *values):
        rows = tuple(self.generateRow(k, j, kv) for k, (j, kv) in enumerate(values, start=1))
        return CombDivergenceReport(rows=rows, j_bound=2.0, clearance=1.0, margin=1.0, truncation_note='',
                                    fit=log_envelope_fit(rows))

    def testFallingDistanceRatioFlattensTheFit(self):
        report = self.generateReport((1.8, 1.0), (1.7, 1.5), (1.65, 2.0))
        self.assertEqual(report.fit, (1.5, 0.0))
        self.assertTrue(report.not_psi_uniform)

    def testRowsOnTheFittedLineAreNotAVerdict(self):
        report = self.generateReport((1.0, 1.0), (1.5, 2.0), (1.8, 2.5))
        self.assertAlmostEqual(report.fit[1], 2.0)
        self.assertFalse(report.exceeds_fit)
        self.assertFalse(report.not_psi_uniform)

    def testUnboundedDistanceRatioIsNotAVerdict(self):
        report = self.generateReport((1.8, 1.0), (1.7, 1.5), (2.5, 4.0))
        self.assertTrue(report.exceeds_fit)
        self.assertFalse(report.not_psi_uniform)

    def testTwoRowsCannotDecide(self):
        report = self.generateReport((1.8, 1.0), (1.7, 1.5))
        self.assertTrue(report.increasing)
        self.assertFalse(report.not_psi_uniform)

    def testBoxClearance(self):
        path = PolyPath.fromPoints([Point(0.0, 0.0), Point(1.0, 0.5)])
        self.assertAlmostEqual(box_clearance(Box(-1.0, 3.0, -2.0, 1.0), path), 0.5)


class SlitTrendTests(SimpleTestCase):

    def testRatioGrowsTowardTheSlit(self):
        trend = slit_trend((0.1, 0.05), rel_tol=0.02, threads=1)
        self.assertTrue(trend.increasing)
        for sample in trend.rows:
            self.assertAlmostEqual(sample.j, math.log(3.0), places=9)


@tag('slow')
class CatalogAcceptanceTests(SimpleTestCase):

    def testDistanceRatioBelowQuasihyperbolicOnFiveHundredSamples(self):
        domains = (build_disc(), build_half_plane(), build_punctured_plane(0.01, 100.0), build_slit_disc(),
                   build_comb(CombParams(u=0.2, t=0.4, v=0.7, k_max=4))[0])
        evaluated, skipped = 0, 0
        for seed, domain in enumerate(domains):
            samples, failed = sampled_metrics(domain, 100, 'boundary-biased', 0.02, seed, None)
            evaluated += len(samples)
            skipped += failed
            for sample in samples:
                with self.subTest(domain=domain.name, x=str(sample.x), y=str(sample.y)):
                    self.assertLessEqual(sample.j, sample.k_est + 3.0 * sample.k_err + 1e-9)
        self.assertEqual(evaluated + skipped, 500)
        self.assertLessEqual(skipped, 25)

    def testCombSamplesStayUnderTheirEnvelope(self):
        params = CombParams(u=0.2, t=0.4, v=0.7, k_max=8)
        comb, _ = build_comb(params)
        samples, skipped = sampled_metrics(comb, 200, 'boundary-biased', 0.02, 42, None)
        self.assertEqual(check_comb_phi(samples, params.alpha), len(samples))
        self.assertLessEqual(skipped, 10)

    def testCombGapsOneToFiveDiverge(self):
        params = CombParams(u=0.2, t=0.4, v=0.7, k_max=7)
        report = comb_divergence(params, range(1, 6), rel_tol=0.02)
        self.assertEqual([row.k_index for row in report.rows], [1, 2, 3, 4, 5])
        self.assertAlmostEqual(report.rows[0].k_lower_bound, math.log(2.5), places=12)
        for row in report.rows:
            with self.subTest(k=row.k_index):
                self.assertGreaterEqual(row.k_est, row.k_lower_bound - 3.0 * row.k_err)
                self.assertLessEqual(row.j_val, math.log(6.25))
        self.assertTrue(report.increasing)
        self.assertTrue(report.not_psi_uniform)
        self.assertGreater(report.clearance, 0.5 * report.margin)

    def testSlitRatioPassesTenAtTheSmallestGap(self):
        trend = slit_trend(SLIT_EPSILONS, rel_tol=0.02)
        self.assertEqual(len(trend.rows), 4)
        self.assertTrue(trend.increasing)
        self.assertGreater(trend.ratios[-1], 10.0)
        for eps, sample in zip(SLIT_EPSILONS, trend.rows):
            with self.subTest(epsilon=eps):
                self.assertGreaterEqual(sample.k_est + 3.0 * sample.k_err, slit_k_lower_bound(eps))


class MetricInequalityTests(SimpleTestCase):

    def testDistanceRatioBelowQuasihyperbolic(self):
        rng = make_rng(21)
        for domain in (build_disc(), build_half_plane(), build_punctured_plane(0.01, 100.0)):
            for x, y in sample_pairs(domain, 2, 'boundary-biased', rng):
                sample = k_metric(domain, x, y, rel_tol=0.02)
                with self.subTest(domain=domain.name):
                    self.assertLessEqual(sample.j, sample.k_est + 3.0 * sample.k_err + 1e-9)

    def testSmallerDomainHasLargerMetric(self):
        x, y = Point(-0.3, 0.2), Point(0.4, -0.1)
        inner = k_metric(build_disc(), x, y, rel_tol=0.02)
        outer = k_metric(build_disc(Point(0.0, 0.0), 2.0), x, y, rel_tol=0.02)
        self.assertGreaterEqual(inner.k_est * 1.04, outer.k_est)


class EnvelopePlotTests(SimpleTestCase):

    def testEnvelopeSvgIsDeterministic(self):
        bins = ((0.1, 0.2), (1.0, 0.9), (10.0, 2.5))
        first = envelope_svg(bins, 'ratio', 'k', 'profile')
        self.assertEqual(first, envelope_svg(bins, 'ratio', 'k', 'profile'))
        self.assertIn('<svg', first)


class ExperimentRunTests(TestCase):

    def testRecordRun(self):
        config = {'seed': 42, 'rel_tol': 0.02, 'max_level': 7}
        run = record_run('experiment comb-divergence', {'kmax': 2}, config, 'k_index\n1\n', 1)
        stored = ExperimentRun.objects.get(pk=run.pk)
        self.assertEqual(stored.output_sha256, ExperimentRun.digest('k_index\n1\n'))
        self.assertEqual(stored.status, RunStatusOptions.SUCCEEDED)
        self.assertEqual(stored.arguments, {'kmax': 2})
        self.assertEqual(str(stored), 'experiment comb-divergence (succeeded)')

    def testFailedRun(self):
        config = {'seed': 1, 'rel_tol': 0.1, 'max_level': 3}
        run = record_run('profile phi', {}, config, '', 0, failed=True)
        self.assertEqual(run.status, RunStatusOptions.FAILED)
