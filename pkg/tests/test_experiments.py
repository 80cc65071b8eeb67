"""
Tests for experiments module.

Sizes are reduced so the suite runs in seconds; set WHITHAM_FLOWMAP_SLOW=1
to also run the experiments at their default sizes.
"""

import math
import os
import unittest

from whitham_flowmap.errors import ConfigurationError
from whitham_flowmap.experiments import (
    next_power_of_two,
    run_conservation,
    run_galilean,
    run_line_nonuniform,
    run_periodic_lowreg,
    run_periodic_nonuniform,
    run_skew_symmetry,
    run_symbol_conditions,
    verify_error_decay,
    verify_norm_lemmas,
    verify_scaling,
)
from whitham_flowmap.symbols import fkdv, kdv, whitham, zero

SLOW = os.environ.get("WHITHAM_FLOWMAP_SLOW") == "1"


class TestPeriodicNonuniform(unittest.TestCase):
    """Tests for the periodic family above s = 3/2."""

    def setUp(self):
        """Set up test data."""
        self.report = run_periodic_nonuniform(2.0, whitham(), [16, 32, 64])

    def test_passes(self):
        """Test every verdict passes at reduced size."""
        self.assertTrue(self.report.passed, self.report.failed_verdicts)

    def test_initial_distance(self):
        """Test d0 = (2/n) sqrt(2 pi) and its slope of -1."""
        row = self.report.rows[1]
        self.assertEqual(row["n"], 32)
        self.assertAlmostEqual(row["d0"], 2.0 / 32 * math.sqrt(2 * math.pi), places=12)
        self.assertAlmostEqual(self.report.slopes["d0_vs_n"]["slope"], -1.0, places=9)

    def test_separation(self):
        """Test the solutions stay near the closed-form distance."""
        for row in self.report.rows:
            self.assertGreater(row["d_star"], self.report.params["separation_floor"])
            self.assertLess(row["gap"], 0.5)

    def test_trajectories(self):
        """Test one trajectory per instance and sign."""
        self.assertEqual(len(self.report.trajectories), 6)
        self.assertIn("n16_omega+1", self.report.trajectories)
        self.assertIn("n64_omega-1", self.report.trajectories)

    def test_low_s_flagged(self):
        """Test s <= 3/2 is flagged, not refused."""
        report = run_periodic_nonuniform(1.5, whitham(), [8, 16, 32])
        self.assertIn("flags", report.params)

    def test_invalid_frequencies(self):
        """Test empty or non-positive frequency lists."""
        with self.assertRaises(ConfigurationError):
            run_periodic_nonuniform(2.0, whitham(), [])


class TestPeriodicLowreg(unittest.TestCase):
    """Tests for the low-regularity periodic construction."""

    def test_passes(self):
        """Test the construction at s = 1."""
        report = run_periodic_lowreg(1.0, 1.6, 0.1, whitham(), [16, 32, 64])
        self.assertTrue(report.passed, report.failed_verdicts)
        for row in report.rows:
            self.assertAlmostEqual(row["t_n"], row["n"] ** -0.6, places=14)

    def test_empty_window(self):
        """Test an empty time window is a configuration error."""
        with self.assertRaises(ConfigurationError):
            run_periodic_lowreg(1.0, 2.5, 0.1, whitham(), [16, 32])

    def test_parameter_ranges(self):
        """Test s, sigma and eps ranges."""
        with self.assertRaises(ConfigurationError):
            run_periodic_lowreg(2.0, 2.5, 0.1, whitham(), [16, 32])
        with self.assertRaises(ConfigurationError):
            run_periodic_lowreg(1.0, 1.4, 0.1, whitham(), [16, 32])
        with self.assertRaises(ConfigurationError):
            run_periodic_lowreg(1.0, 1.6, 0.0, whitham(), [16, 32])

    def test_parallel_matches_sequential(self):
        """Test a process pool gives the same rows in the same order."""
        serial = run_periodic_lowreg(1.0, 1.6, 0.1, whitham(), [16, 32])
        pooled = run_periodic_lowreg(1.0, 1.6, 0.1, whitham(), [16, 32], jobs=2)
        self.assertEqual(serial.rows, pooled.rows)


class TestLineNonuniform(unittest.TestCase):
    """Tests for the two-scale construction on the long torus."""

    def test_passes(self):
        """Test every verdict passes at reduced size."""
        report = run_line_nonuniform(2.0, 1.1, whitham(), [16, 24, 32])
        self.assertTrue(report.passed, report.failed_verdicts)
        for row in report.rows:
            self.assertLess(row["boundary_contamination"], 1e-10)
        self.assertAlmostEqual(report.slopes["d0_vs_lambda"]["slope"], -0.45, delta=0.05)

    def test_delta_range(self):
        """Test delta must exceed max(1, gamma)."""
        with self.assertRaises(ConfigurationError):
            run_line_nonuniform(2.0, 1.4, fkdv(1.5), [8, 16, 32])
        with self.assertRaises(ConfigurationError):
            run_line_nonuniform(2.0, 2.0, whitham(), [8, 16, 32])

    @unittest.skipUnless(SLOW, "set WHITHAM_FLOWMAP_SLOW=1")
    def test_default_size(self):
        """Test the default lambda list with delta = 3/2."""
        report = run_line_nonuniform(2.0, 1.5, whitham(), [16, 32, 64])
        self.assertTrue(report.passed, report.failed_verdicts)


class TestNormLemmas(unittest.TestCase):
    """Tests for the norm verifications."""

    def test_passes_reduced(self):
        """Test mode ratios and packet limits with lambda up to 64."""
        report = verify_norm_lemmas(whitham(), lambda_list=(16, 32, 64), min_lambda=64)
        self.assertTrue(report.passed, report.failed_verdicts)
        kinds = [row["kind"] for row in report.rows]
        self.assertEqual(kinds.count("mode"), 4)
        self.assertEqual(kinds.count("packet"), 3)

    @unittest.skipUnless(SLOW, "set WHITHAM_FLOWMAP_SLOW=1")
    def test_passes_default(self):
        """Test the default lambda list up to 256."""
        self.assertTrue(verify_norm_lemmas(whitham()).passed)


class TestErrorDecay(unittest.TestCase):
    """Tests for residual decay."""

    def test_periodic_l2(self):
        """Test ||E||_{L^2} decays like n^(-3) at s = 2."""
        report = verify_error_decay(whitham(), "periodic", s=2.0, sigma=0.0)
        self.assertTrue(report.passed, report.failed_verdicts)
        self.assertAlmostEqual(report.slopes["residual_vs_n"]["slope"], -3.0, places=6)
        for row in report.rows:
            self.assertLess(row["identity_defect"], 1e-12)
        self.assertTrue(report.verdicts["closed_form_identity"]["passed"])

    def test_periodic_sobolev(self):
        """Test ||E||_{H^2} decays like n^(-1) at s = 2 and t > 0."""
        report = verify_error_decay(whitham(), "periodic", s=2.0, sigma=2.0, t=0.7)
        self.assertTrue(report.passed, report.failed_verdicts)
        self.assertEqual(report.experiment_id, "error-decay-periodic")

    def test_line(self):
        """Test the line residual decays faster than lambda^(-s)."""
        report = verify_error_decay(whitham(), "line", lambda_list=(8, 16, 32))
        self.assertTrue(report.passed, report.failed_verdicts)
        self.assertGreater(report.params["empirical_epsilon"], 0.0)

    def test_unknown_family(self):
        """Test only periodic and line families exist."""
        with self.assertRaises(ConfigurationError):
            verify_error_decay(whitham(), "sphere")


class TestScaling(unittest.TestCase):
    """Tests for the scaling comparison."""

    def test_whitham_defect_decays(self):
        """Test the sup defect decays like lambda^(-1-delta/2)."""
        report = verify_scaling(whitham(), (4, 8, 16), 1.5)
        self.assertTrue(report.passed, report.failed_verdicts)
        for row in report.rows:
            self.assertLess(row["initial_defect"], 1e-12)

    def test_homogeneous_symbol_not_asserted(self):
        """Test scale-invariant symbols skip the slope verdict."""
        report = verify_scaling(fkdv(1.5), (4, 8, 16), 1.5)
        self.assertNotIn("defect_slope", report.verdicts)
        self.assertIn("no_blowup", report.verdicts)
        self.assertIn("flags", report.params)


class TestSolverChecks(unittest.TestCase):
    """Tests for conservation, Galilean invariance and skew symmetry."""

    def test_conservation(self):
        """Test drift verdicts for the Whitham flow."""
        report = run_conservation(whitham())
        self.assertTrue(report.passed, report.failed_verdicts)
        self.assertEqual(report.params["amplitude"], 1.0)
        self.assertEqual(report.params["t_end"], 1.0)
        self.assertIn("conservation", report.trajectories)

    def test_galilean(self):
        """Test shifted and boosted solutions agree."""
        report = run_galilean(whitham())
        self.assertTrue(report.passed, report.failed_verdicts)

    def test_skew_symmetry(self):
        """Test integral f L(f_x) vanishes and the seed is reproducible."""
        first = run_skew_symmetry(whitham(), trials=20, seed=3)
        second = run_skew_symmetry(whitham(), trials=20, seed=3)
        self.assertTrue(first.passed)
        self.assertEqual(first.rows, second.rows)


class TestSymbolConditions(unittest.TestCase):
    """Tests for the symbol-conditions report."""

    def test_kdv_flagged_but_passing(self):
        """Test KdV passes the checks but is flagged for the line."""
        report = run_symbol_conditions(kdv())
        self.assertTrue(report.passed)
        self.assertTrue(report.params["flags"])
        self.assertNotIn("line", report.params["regimes"])

    def test_zero_symbol_fails(self):
        """Test the zero symbol fails for lack of tail samples."""
        report = run_symbol_conditions(zero())
        self.assertFalse(report.passed)
        self.assertEqual(report.failed_verdicts, ["tail_samples"])


class TestHelpers(unittest.TestCase):
    """Tests for module helpers."""

    def test_next_power_of_two(self):
        """Test rounding up with the minimum grid size."""
        self.assertEqual(next_power_of_two(3), 8)
        self.assertEqual(next_power_of_two(64), 64)
        self.assertEqual(next_power_of_two(65), 128)


if __name__ == "__main__":
    unittest.main()
