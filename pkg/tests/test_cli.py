"""
TEST SUITE: command-line interface and file codecs
===================================================

Runs `main(argv)` end to end inside a temporary directory and checks exit
codes, output files and the JSON error report.
"""

import io
import json
import math
import os
import shutil
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from unittest.mock import patch

import numpy as np
import pandas as pd

from ownership_entropy import writers
from ownership_entropy.calibrate import entropy_surface
from ownership_entropy.cli import EXIT_ALARM, EXIT_DOMAIN_ERROR, EXIT_OK, EXIT_USAGE, main
from ownership_entropy.config import CASE_STUDY_EDGE_FILE, SAMPLE_EDGE_FILE
from ownership_entropy.marginals import exponential_pmf
from ownership_entropy.models import (
    CalibrationResult,
    DegreeRecord,
    DiscretePMF,
    JointPMF,
    MarginalSpec,
    ScanResult,
)


def error_of(stderr_text):
    """The JSON error report, which follows any console log lines on stderr."""
    return json.loads(stderr_text[stderr_text.index('{\n'):])['error']


class CliTestCase(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp()
        self.env = patch.dict(os.environ, {'OWNERSHIP_ENTROPY_LOG_FILE': os.path.join(self.tmp, 'run.log')})
        self.env.start()

    def tearDown(self):
        self.env.stop()
        shutil.rmtree(self.tmp, ignore_errors=True)

    def path(self, name):
        return os.path.join(self.tmp, name)

    def write(self, name, text):
        with open(self.path(name), 'w', encoding='utf-8') as f:
            f.write(text)
        return self.path(name)

    def run_cli(self, *argv):
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = main(list(argv))
        return code, out.getvalue(), err.getvalue()

    def read(self, name):
        with open(self.path(name), encoding='utf-8') as f:
            return f.read()


class TestDegreesCommand(CliTestCase):

    def test_degree_table_and_histograms(self):
        code, _, _ = self.run_cli('degrees', SAMPLE_EDGE_FILE, '-o', self.path('deg.csv'), '-q',
                                  '--hist-dir', self.path('hist'))
        self.assertEqual(code, EXIT_OK)
        lines = self.read('deg.csv').splitlines()
        self.assertEqual(lines[0], 'node_id,k_in,k_out')
        self.assertEqual(len(lines), 15)
        self.assertTrue(os.path.exists(self.path('hist/k_in_hist.csv')))
        self.assertEqual(self.read('hist/k_out_hist.csv').splitlines()[0], 'j,prob')

    def test_json_output(self):
        code, out, _ = self.run_cli('degrees', SAMPLE_EDGE_FILE, '--format', 'json')
        self.assertEqual(code, EXIT_OK)
        payload = json.loads(out)
        self.assertEqual(payload['format_version'], 1)
        self.assertEqual((payload['nodes'], payload['edges']), (14, 30))

    def test_missing_file_is_usage_error(self):
        code, _, err = self.run_cli('degrees', self.path('absent.csv'))
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn('Input path not found', err)

    def test_empty_network_reports_json_error(self):
        edges = self.write('empty.csv', 'owner,owned\n')
        code, _, err = self.run_cli('degrees', edges)
        self.assertEqual(code, EXIT_DOMAIN_ERROR)
        self.assertEqual(error_of(err)['kind'], 'empty_input')

    def test_parse_errors_list_rows(self):
        edges = self.write('bad.csv', 'A,B\nC\nD,E,heavy\n')
        code, _, err = self.run_cli('degrees', edges, '-o', self.path('out.json'))
        self.assertEqual(code, EXIT_DOMAIN_ERROR)
        error = error_of(err)
        self.assertEqual(error['kind'], 'parse_error')
        self.assertEqual([row['line'] for row in error['rows']], [2, 3])
        self.assertEqual(json.loads(self.read('out.json'))['error'], error)

    def test_unknown_command(self):
        code, _, _ = self.run_cli('plot')
        self.assertEqual(code, EXIT_USAGE)


class TestFitCommand(CliTestCase):

    def test_synthetic_mle(self):
        code, _, _ = self.run_cli('fit', '--synthetic', 'power_law:2.5:19', '--method', 'mle',
                                  '--size', '20000', '--seed', '1', '-o', self.path('fit.json'))
        self.assertEqual(code, EXIT_OK)
        fit = json.loads(self.read('fit.json'))['fit']
        self.assertEqual(fit['method'], 'mle')
        self.assertAlmostEqual(fit['estimate'], 2.5, delta=0.1)

    def test_histogram_least_squares(self):
        hist = self.write('hist.csv', writers.pmf_csv(exponential_pmf(-0.9727, 10)))
        code, out, _ = self.run_cli('fit', hist, '--family', 'exponential')
        self.assertEqual(code, EXIT_OK)
        self.assertAlmostEqual(json.loads(out)['fit']['estimate'], -0.9727, places=6)

    def test_seed_without_synthetic(self):
        hist = self.write('hist.csv', 'j,prob\n1,0.5\n2,0.3\n3,0.2\n')
        code, _, err = self.run_cli('fit', hist, '--seed', '3')
        self.assertEqual(code, EXIT_DOMAIN_ERROR)
        self.assertEqual(error_of(err)['kind'], 'configuration_error')


class TestJointCommands(CliTestCase):

    def _product_joint(self):
        code, _, _ = self.run_cli('joint', '--k-in', 'exponential:-0.9727:10', '--k-out', 'power_law:2.159:19',
                                  '--copula', 'product', '-o', self.path('joint.csv'))
        self.assertEqual(code, EXIT_OK)
        return self.path('joint.csv')

    def test_joint_csv(self):
        lines = self.read(os.path.basename(self._product_joint())).splitlines()
        self.assertEqual(lines[0], 'i,j,mass')
        self.assertEqual(len(lines), 1 + 10 * 19)

    def test_entropy_of_product_joint(self):
        joint = self._product_joint()
        code, out, _ = self.run_cli('entropy', '--joint', joint)
        self.assertEqual(code, EXIT_OK)
        values = pd.read_csv(io.StringIO(out)).set_index('measure')['value']
        self.assertAlmostEqual(values['entropy'], values['entropy_k_in'] + values['entropy_k_out'], places=9)
        self.assertLess(values['mutual_information'], 1e-9)

    def test_literal_entropy_flag(self):
        code, out, _ = self.run_cli('entropy', '--k-in', 'power_law:2:5', '--k-out', 'power_law:2:5',
                                    '--copula', 'gumbel:2', '--literal', '--format', 'json')
        self.assertEqual(code, EXIT_OK)
        self.assertIn('copula_value_entropy', json.loads(out))

    def test_distance_of_identical_joints(self):
        joint = self._product_joint()
        code, out, _ = self.run_cli('distance', joint, joint, '--format', 'json')
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out)['distance'], 0.0)

    def test_distance_to_upper_bound(self):
        joint = self._product_joint()
        code, out, _ = self.run_cli('distance', joint, '--copula', 'frechet-upper', '--format', 'json')
        self.assertEqual(code, EXIT_OK)
        self.assertGreater(json.loads(out)['distance'], 0.0)

    def test_scan_rows(self):
        code, out, _ = self.run_cli('scan', '--family', 'gumbel', '--grid', '1:10:100')
        self.assertEqual(code, EXIT_OK)
        lines = out.splitlines()
        self.assertEqual(lines[0], 'theta,entropy')
        self.assertEqual(len(lines), 101)

    def test_calibrate_frank_toward_product(self):
        joint = self._product_joint()
        code, out, _ = self.run_cli('calibrate', '--family', 'frank', '--objective', 'distance',
                                    '--target', joint, '--coarse-points', '64')
        self.assertEqual(code, EXIT_OK)
        calibration = json.loads(out)['calibration']
        self.assertEqual(calibration['location'], 'asymptotic-no-optimum')
        self.assertEqual(calibration['goal'], 'min')

    def test_calibrate_clayton_window(self):
        code, out, _ = self.run_cli('calibrate', '--family', 'clayton', '--goal', 'min',
                                    '--window=-1:-0.05', '--coarse-points', '32', '--trace')
        self.assertEqual(code, EXIT_OK)
        calibration = json.loads(out)['calibration']
        self.assertEqual(calibration['window'], [[-1.0, -0.05]])
        self.assertEqual(len(calibration['trace']['theta']), 32)

    def test_distance_objective_needs_target(self):
        code, _, err = self.run_cli('calibrate', '--family', 'gumbel', '--objective', 'distance')
        self.assertEqual(code, EXIT_DOMAIN_ERROR)
        self.assertEqual(error_of(err)['kind'], 'configuration_error')

    def test_alarms_set_exit_code(self):
        flagged = JointPMF(n_in=1, n_out=1, mass=[[1.0]], alarms=('product: 1 cell(s) with negative mass',))
        with patch('ownership_entropy.cli.joint_from_copula', return_value=flagged):
            code, _, _ = self.run_cli('joint', '--k-in', 'power_law:2:3', '--k-out', 'power_law:2:3')
        self.assertEqual(code, EXIT_ALARM)


class TestReportCommand(CliTestCase):

    def test_report_is_reproducible(self):
        with patch.dict(os.environ, {'OWNERSHIP_ENTROPY_COARSE_POINTS': '32'}):
            first = self.run_cli('report', SAMPLE_EDGE_FILE, '--k-grid', '0.5:2:4', '-o', self.path('a.json'))
            second = self.run_cli('report', SAMPLE_EDGE_FILE, '--k-grid', '0.5:2:4', '-o', self.path('b.json'),
                                  '--workers', '2')
        self.assertEqual(self.read('a.json'), self.read('b.json'))
        report = json.loads(self.read('a.json'))
        self.assertEqual(first[0], EXIT_ALARM if report['alarms'] else EXIT_OK)
        self.assertEqual(first[0], second[0])
        self.assertEqual(report['nodes'], 14)
        self.assertEqual(report['support'], {'n_in': 7, 'n_out': 6})
        self.assertEqual(set(report['case1']['distances']), {'product', 'frechet-lower', 'frechet-upper'})
        self.assertEqual(set(report['case3']), {f'step{i}' for i in range(1, 6)})
        self.assertEqual(report['case3']['step1']['k_out'], 'power_law')
        self.assertEqual(report['case3']['step3']['k_in'], 'exponential')
        self.assertEqual(report['case2']['maximize']['gumbel']['location'], 'boundary')


class TestCaseStudyNetwork(CliTestCase):
    """Network at case-study scale: companies with both degrees positive span [1..10] x [1..19]."""

    def test_degree_ranges(self):
        code, out, _ = self.run_cli('degrees', CASE_STUDY_EDGE_FILE, '--format', 'json')
        self.assertEqual(code, EXIT_OK)
        payload = json.loads(out)
        self.assertEqual((payload['nodes'], payload['edges']), (55, 195))
        self.assertEqual(max(r['k_out'] for r in payload['records']), 19)
        self.assertEqual(max(r['k_in'] for r in payload['records']), 10)
        self.assertEqual((payload['k_in']['n'], payload['k_out']['n']), (10, 19))
        self.assertAlmostEqual(payload['k_in']['probs'][0], 0.6, places=12)
        self.assertAlmostEqual(payload['k_out']['probs'][18], 0.2, places=12)

    def test_report_distance_ordering(self):
        with patch.dict(os.environ, {'OWNERSHIP_ENTROPY_COARSE_POINTS': '32'}):
            code, _, _ = self.run_cli('report', CASE_STUDY_EDGE_FILE, '--k-grid', '0.5:2:4',
                                      '-o', self.path('report.json'))
        self.assertIn(code, (EXIT_OK, EXIT_ALARM))
        report = json.loads(self.read('report.json'))
        self.assertEqual(report['support'], {'n_in': 10, 'n_out': 19})
        distances = report['case1']['distances']
        self.assertLess(distances['product'], distances['frechet-lower'])
        self.assertLess(distances['frechet-lower'], distances['frechet-upper'])
        # Independent counts 9/3/3 per row and column, with (1, 1) and (2, 2) each
        # giving one company to (1, 2) and (2, 1)
        self.assertAlmostEqual(distances['product'], 0.08, places=9)
        self.assertAlmostEqual(distances['frechet-lower'], math.sqrt(0.0352), places=9)
        self.assertAlmostEqual(distances['frechet-upper'], math.sqrt(0.2272), places=9)


class TestWriters(unittest.TestCase):

    def test_round_float(self):
        self.assertEqual(writers.round_float(-0.0), 0.0)
        self.assertIsNone(writers.round_float(float('nan')))
        self.assertEqual(writers.round_float(1 / 3), 0.333333333333)

    def test_json_document_shape(self):
        text = writers.dumps_json({'value': np.float64(0.1), 'flags': (True, False)})
        self.assertTrue(text.startswith('{\n  "format_version": 1'))
        self.assertTrue(text.endswith('\n'))
        self.assertEqual(json.loads(text)['flags'], [True, False])

    def test_pmf_csv(self):
        self.assertEqual(writers.pmf_csv(DiscretePMF(n=2, probs=[0.5, 0.5])), 'j,prob\n1,0.5\n2,0.5\n')

    def test_read_pmf_fills_gaps(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'h.csv')
            with open(path, 'w') as f:
                f.write('j,count\n1,3\n3,1\n')
            np.testing.assert_allclose(writers.read_pmf_csv(path).probs, [0.75, 0.0, 0.25])

    def test_read_sample_skips_header(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 's.csv')
            with open(path, 'w') as f:
                f.write('k\n1\n2\n2\n')
            np.testing.assert_array_equal(writers.read_sample_csv(path), [1, 2, 2])

    def test_degrees_csv(self):
        records = [DegreeRecord(node_id='Banca Intesa', k_in=2, k_out=0),
                   DegreeRecord(node_id='B', k_in=0, k_out=1)]
        self.assertEqual(writers.degrees_csv(records), 'node_id,k_in,k_out\nBanca Intesa,2,0\nB,0,1\n')

    def test_calibration_payload_reports_objective_value(self):
        trace = ScanResult(axes=('theta',), objective='distance', points=[[1.0], [2.0]], values=[0.3, 0.1])
        result = CalibrationResult(family='gumbel', objective='distance', goal='min', theta_star=2.0,
                                   value=0.1, coarse_value=0.1, location='interior', window=((1.0, 2.0),),
                                   trace=trace)
        payload = writers.to_jsonable(writers.calibration_payload(result))
        self.assertEqual(payload['objective'], 0.1)
        self.assertEqual(payload['measure'], 'distance')
        self.assertEqual((payload['theta_star'], payload['k_star']), (2.0, None))
        self.assertNotIn('value', payload)

    def test_surface_payload_carries_k_star(self):
        surface = entropy_surface(MarginalSpec(variant='power_law', n=4, gamma=1.0),
                                  MarginalSpec(variant='empirical', n=2, counts=(1.0, 1.0)),
                                  'gumbel', (0.5, 1.5, 3), grid_theta=(1.0, 3.0, 3))
        optimum = writers.to_jsonable(writers.surface_payload(surface))['optimum']
        self.assertEqual(optimum['k_star'], surface.k_at_max)
        self.assertEqual(optimum['objective'], writers.round_float(surface.h_at_max))
        self.assertEqual(optimum['measure'], 'entropy')

    def test_joint_round_trip_shape(self):
        joint = JointPMF(n_in=2, n_out=1, mass=[[0.25], [0.75]])
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'j.csv')
            writers.write_text(writers.joint_csv(joint), path)
            loaded = writers.read_joint_csv(path)
        np.testing.assert_allclose(loaded.mass, joint.mass)


if __name__ == '__main__':
    unittest.main()
