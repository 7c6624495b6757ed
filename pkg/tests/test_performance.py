"""Performance tests for calibration runtime and the full report."""

import os
import subprocess
import sys
import time
import unittest

from ownership_entropy.calibrate import extremize_entropy, minimize_distance
from ownership_entropy.cli import build_report
from ownership_entropy.config import (
    FIXTURE_IN_N,
    FIXTURE_IN_RATE,
    FIXTURE_OUT_GAMMA,
    FIXTURE_OUT_N,
    SAMPLE_EDGE_FILE,
)
from ownership_entropy.copulas import check_copula_axioms, make_copula
from ownership_entropy.marginals import exponential_pmf, power_law_pmf
from ownership_entropy.sklar import joint_from_copula


AXIOM_CHECK_MAX_SECONDS = float(os.getenv("AXIOM_CHECK_MAX_SECONDS", "1.0"))
CALIBRATION_MAX_SECONDS = float(os.getenv("CALIBRATION_MAX_SECONDS", "10.0"))
REPORT_MAX_SECONDS = float(os.getenv("REPORT_MAX_SECONDS", "60.0"))
CLI_START_MAX_SECONDS = float(os.getenv("CLI_START_MAX_SECONDS", "8.0"))


class TestPerformance(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.pmf_in = exponential_pmf(FIXTURE_IN_RATE, FIXTURE_IN_N)
        cls.pmf_out = power_law_pmf(FIXTURE_OUT_GAMMA, FIXTURE_OUT_N)

    def test_axiom_checks_within_time_limit(self):
        start_time = time.perf_counter()
        for family, theta in (('gumbel', 2.0), ('clayton', -0.5), ('clayton', 3.0), ('frank', 5.0)):
            self.assertTrue(check_copula_axioms(make_copula(family, theta)).passes(1e-9))
        elapsed = time.perf_counter() - start_time

        self.assertLess(
            elapsed,
            AXIOM_CHECK_MAX_SECONDS,
            f"Axiom checks exceeded time limit: {elapsed:.3f}s",
        )

    def test_calibration_within_time_limit(self):
        target = joint_from_copula(make_copula('frank', 5.0), self.pmf_in, self.pmf_out)

        start_time = time.perf_counter()
        fit = minimize_distance('frank', self.pmf_in, self.pmf_out, target)
        high = extremize_entropy('gumbel', self.pmf_in, self.pmf_out, 'max')
        elapsed = time.perf_counter() - start_time

        self.assertAlmostEqual(fit.theta_star, 5.0, delta=1e-3)
        self.assertEqual(high.location, 'boundary')
        self.assertLess(
            elapsed,
            CALIBRATION_MAX_SECONDS,
            f"Calibration runtime exceeded time limit: {elapsed:.3f}s",
        )

    def test_report_within_time_limit(self):
        start_time = time.perf_counter()
        report, _alarms = build_report(SAMPLE_EDGE_FILE, (0.1, 4.0, 40))
        elapsed = time.perf_counter() - start_time

        self.assertEqual(report['nodes'], 14)
        self.assertLess(
            elapsed,
            REPORT_MAX_SECONDS,
            f"Report runtime exceeded time limit: {elapsed:.3f}s",
        )

    def test_cli_start_time(self):
        env = dict(os.environ)
        src = os.path.join(os.path.dirname(__file__), '..', 'src')
        env['PYTHONPATH'] = os.pathsep.join(filter(None, [src, env.get('PYTHONPATH')]))

        start_time = time.perf_counter()
        process = subprocess.run(
            [sys.executable, "-m", "ownership_entropy.cli", "--help"],
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
            text=True,
            env=env,
            timeout=60,
        )
        elapsed = time.perf_counter() - start_time

        self.assertEqual(process.returncode, 0)
        self.assertIn("calibrate", process.stdout)
        self.assertLess(
            elapsed,
            CLI_START_MAX_SECONDS,
            f"CLI start exceeded time limit: {elapsed:.3f}s",
        )
