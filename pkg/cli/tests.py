import csv
import io
import json
import math
import os
import tempfile

from django.conf import settings
from django.core.cache import caches
from django.core.cache.backends.dummy import DummyCache
from django.core.cache.backends.locmem import LocMemCache
from django.test import SimpleTestCase, TestCase
from rest_framework.exceptions import ValidationError

from analysis.models import ExperimentRun, RunStatusOptions
from domains.catalog import build_disc
from geometry.primitives import Point
from cli.output import formatValue, render_scalar, render_table
from cli.runner import EXIT_COMPUTATION, EXIT_OK, EXIT_USAGE, run
from cli.serializers import build_run_config


class CliTestConfiguration:

    @staticmethod
    def generateRun(*argv):
        stdout, stderr = io.StringIO(), io.StringIO()
        code = run(list(argv), stdout=stdout, stderr=stderr)
        return code, stdout.getvalue(), stderr.getvalue()

    @staticmethod
    def generateDomainFile(folder):
        path = os.path.join(folder, 'disc.json')
        document = build_disc(Point(0.0, 0.0), 2.0).toRecord()
        document['name'] = 'wide-disc'
        with open(path, 'w', encoding='utf-8') as handle:
            json.dump(document, handle)
        return path


class OutputFormattingTests(SimpleTestCase):

    def testSixSignificantDigits(self):
        self.assertEqual(formatValue(math.log(2.0)), '0.693147')
        self.assertEqual(formatValue(True), 'true')
        self.assertEqual(formatValue(None), '')
        self.assertEqual(formatValue(math.inf), 'inf')

    def testJsonKeepsFullPrecision(self):
        payload = json.loads(render_scalar('j', math.log(2.0), 'json'))
        self.assertEqual(payload['j'], math.log(2.0))

    def testCsvTable(self):
        text = render_table(['a', 'b'], [[1, 0.5], [2, 0.25]], 'csv')
        self.assertEqual(text, 'a,b\n1,0.5\n2,0.25\n')


class RunConfigTests(SimpleTestCase):

    def testDefaultsComeFromSettings(self):
        config = build_run_config()
        self.assertEqual(config.output_format, 'csv')
        self.assertGreater(config.rel_tol, 0.0)
        self.assertGreaterEqual(config.threads, 1)

    def testRelTolOutOfRangeIsRejected(self):
        for value in (0.0, 0.6, -0.1):
            with self.subTest(rel_tol=value), self.assertRaises(ValidationError):
                build_run_config(rel_tol=value)

    def testMaxLevelIsBounded(self):
        with self.assertRaises(ValidationError):
            build_run_config(max_level=0)


class SettingsTests(SimpleTestCase):

    def testOnlyTheToolkitAppsAreInstalled(self):
        self.assertNotIn('django.contrib.auth', settings.INSTALLED_APPS)
        self.assertNotIn('django.contrib.contenttypes', settings.INSTALLED_APPS)
        self.assertIsNone(settings.REST_FRAMEWORK['UNAUTHENTICATED_USER'])

    def testOnlyGridsAreCached(self):
        self.assertIsInstance(caches['default'], DummyCache)
        self.assertIsInstance(caches['grids'], LocMemCache)


class MetricCommandTests(SimpleTestCase):

    def testDistanceRatioInDisc(self):
        code, out, _ = CliTestConfiguration.generateRun('metric', 'j', '--domain', 'disc', '--x', '0,0', '--y', '0.5,0')
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out.strip(), '0.693147')

    def testQuasihyperbolicInHalfPlane(self):
        code, out, _ = CliTestConfiguration.generateRun(
            'metric', 'k', '--domain', 'half-plane', '--x', '0,1', '--y', '0,2.71828', '--threads', '1')
        self.assertEqual(code, EXIT_OK)
        self.assertAlmostEqual(float(out), 1.0, delta=0.03)

    def testJsonOutputCarriesTheSample(self):
        code, out, _ = CliTestConfiguration.generateRun(
            'metric', 'k', '--domain', 'half-plane', '--x', '0,1', '--y', '0,2.71828', '--format', 'json')
        self.assertEqual(code, EXIT_OK)
        payload = json.loads(out)
        self.assertIn('k', payload)
        self.assertIn('geodesic', payload)

    def testRerunIsByteIdentical(self):
        argv = ('metric', 'k', '--domain', 'half-plane', '--x', '0,1', '--y', '2,1.5', '--format', 'json',
                '--threads', '1')
        _, first, _ = CliTestConfiguration.generateRun(*argv)
        _, second, _ = CliTestConfiguration.generateRun(*argv)
        self.assertEqual(first, second)

    def testDomainFileWinsOverCatalog(self):
        with tempfile.TemporaryDirectory() as folder:
            path = CliTestConfiguration.generateDomainFile(folder)
            code, out, _ = CliTestConfiguration.generateRun('metric', 'j', '--domain', path, '--x', '0,0',
                                                            '--y', '1,0')
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out.strip(), '0.693147')

    def testOutFileReceivesTheResult(self):
        with tempfile.TemporaryDirectory() as folder:
            target = os.path.join(folder, 'j.txt')
            code, out, _ = CliTestConfiguration.generateRun('metric', 'j', '--domain', 'disc', '--x', '0,0',
                                                            '--y', '0.5,0', '--out', target)
            with open(target, encoding='utf-8') as handle:
                written = handle.read()
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out, '')
        self.assertEqual(written.strip(), '0.693147')


class ExitCodeTests(SimpleTestCase):

    def testBadRelTolIsUsageError(self):
        code, _, err = CliTestConfiguration.generateRun('metric', 'j', '--domain', 'disc', '--x', '0,0',
                                                        '--y', '0.5,0', '--rel-tol', '0.9')
        self.assertEqual(code, EXIT_USAGE)
        self.assertEqual(json.loads(err)['error'], 'invalid_input')

    def testUnknownDomainIsUsageError(self):
        code, _, err = CliTestConfiguration.generateRun('metric', 'j', '--domain', 'teapot', '--x', '0,0',
                                                        '--y', '0.5,0')
        self.assertEqual(code, EXIT_USAGE)
        self.assertEqual(json.loads(err)['error'], 'invalid_params')

    def testMalformedPointIsUsageError(self):
        code, _, _ = CliTestConfiguration.generateRun('metric', 'j', '--domain', 'disc', '--x', '0', '--y', '0.5,0')
        self.assertEqual(code, EXIT_USAGE)

    def testMalformedMapIsUsageError(self):
        for value in ('not-a-map', '1,2,3', '1j,x,0,1'):
            with self.subTest(map=value):
                code, out, err = CliTestConfiguration.generateRun('experiment', 'mobius', '--domain', 'disc',
                                                                  '--map', value, '--samples', '1')
                self.assertEqual(code, EXIT_USAGE)
                self.assertEqual(out, '')
                self.assertEqual(json.loads(err)['error'], 'invalid_params')

    def testPathThroughPunctureIsComputationError(self):
        code, out, err = CliTestConfiguration.generateRun('metric', 'qh-length', '--domain', 'punctured-plane',
                                                          '--path=-1,0;1,0')
        self.assertEqual(code, EXIT_COMPUTATION)
        self.assertEqual(out, '')
        self.assertEqual(json.loads(err)['error'], 'path_exits_domain')


class DomainCommandTests(SimpleTestCase):

    def testListNamesTheCatalog(self):
        code, out, _ = CliTestConfiguration.generateRun('domain', 'list')
        self.assertEqual(code, EXIT_OK)
        names = out.split()
        self.assertEqual(names[0], 'name')
        self.assertIn('comb', names)
        self.assertIn('slit-disc', names)

    def testShowIsJson(self):
        code, out, _ = CliTestConfiguration.generateRun('domain', 'show', '--domain', 'disc')
        self.assertEqual(code, EXIT_OK)
        self.assertIn('primitives', json.loads(out))

    def testSvgOutline(self):
        code, out, _ = CliTestConfiguration.generateRun('domain', 'svg', '--domain', 'disc')
        self.assertEqual(code, EXIT_OK)
        self.assertIn('<svg', out)

    def testBuildWritesACombDocument(self):
        with tempfile.TemporaryDirectory() as folder:
            target = os.path.join(folder, 'comb.json')
            code, out, _ = CliTestConfiguration.generateRun('domain', 'build', '--catalog', 'comb', '--u', '0.2',
                                                            '--t', '0.4', '--v', '0.7', '--kmax', '3',
                                                            '--out', target)
            with open(target, encoding='utf-8') as handle:
                document = json.load(handle)
            reloaded, checked, _ = CliTestConfiguration.generateRun('domain', 'check', '--domain', target)
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out, '')
        self.assertEqual(document['catalog'], {'name': 'comb', 'u': 0.2, 't': 0.4, 'v': 0.7, 'kmax': 3})
        self.assertEqual(len(document['primitives']), 7)
        self.assertEqual(reloaded, EXIT_OK)
        self.assertIn('true', checked)

    def testBuildPassesCatalogOptions(self):
        code, out, _ = CliTestConfiguration.generateRun('domain', 'build', '--catalog', 'disc',
                                                        '--param', 'radius=2')
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out)['primitives'][0]['radius'], 2)

    def testBuildRejectsBadCombParameters(self):
        code, _, err = CliTestConfiguration.generateRun('domain', 'build', '--catalog', 'comb', '--u', '0.5')
        self.assertEqual(code, EXIT_USAGE)
        self.assertEqual(json.loads(err)['error'], 'invalid_params')

    def testBuildRejectsUnknownCatalogName(self):
        code, _, _ = CliTestConfiguration.generateRun('domain', 'build', '--catalog', 'teapot')
        self.assertEqual(code, EXIT_USAGE)


class ExperimentCommandTests(SimpleTestCase):

    def testCombDivergenceRows(self):
        code, out, _ = CliTestConfiguration.generateRun('experiment', 'comb-divergence', '--kmax', '2',
                                                        '--threads', '1')
        self.assertEqual(code, EXIT_OK)
        rows = list(csv.DictReader(io.StringIO(out)))
        self.assertEqual([row['k_index'] for row in rows], ['1', '2'])
        self.assertEqual(rows[0]['k_lower_bound'], '0.916291')
        self.assertLess(float(rows[0]['ratio_kj']), float(rows[1]['ratio_kj']))

    def testCombDivergenceJsonCarriesTheVerdict(self):
        code, out, _ = CliTestConfiguration.generateRun('experiment', 'comb-divergence', '--kmax', '2',
                                                        '--threads', '1', '--format', 'json')
        self.assertEqual(code, EXIT_OK)
        payload = json.loads(out)
        self.assertEqual([row['k_index'] for row in payload['rows']], [1, 2])
        self.assertTrue(payload['ratio_increasing'])
        self.assertGreater(payload['box_clearance'], 0.5 * payload['margin'])
        self.assertIn('u^4', payload['truncation_note'])
        self.assertIn('not_psi_uniform', payload)


class LedgerRecordingTests(TestCase):

    def testRecordStoresTheRun(self):
        code, out, _ = CliTestConfiguration.generateRun('metric', 'j', '--domain', 'disc', '--x', '0,0',
                                                        '--y', '0.5,0', '--record', '--seed', '7')
        self.assertEqual(code, EXIT_OK)
        stored = ExperimentRun.objects.get()
        self.assertEqual(stored.command, 'metric j')
        self.assertEqual(stored.seed, 7)
        self.assertEqual(stored.status, RunStatusOptions.SUCCEEDED)
        self.assertEqual(stored.output_sha256, ExperimentRun.digest(out))
