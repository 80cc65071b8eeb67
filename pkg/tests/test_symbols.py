"""
Tests for symbols module.
"""

import math
import tempfile
import unittest
from pathlib import Path

import numpy as np

from whitham_flowmap.errors import ConfigurationError, InsufficientDataError, SymbolRangeError
from whitham_flowmap.models import SymbolKind
from whitham_flowmap.symbols import (
    bo,
    check_symbol_conditions,
    custom,
    eval_symbol,
    fkdv,
    kdv,
    load_custom_symbol,
    nonuniformity_regimes,
    parse_symbol,
    symbol_name,
    whitham,
    zero,
)


class TestEvalSymbol(unittest.TestCase):
    """Tests for evaluating the built-in symbols."""

    def test_whitham_values(self):
        """Test Whitham symbol against sqrt(tanh(xi)/xi)."""
        self.assertEqual(eval_symbol(whitham(), 0.0), 1.0)
        self.assertAlmostEqual(eval_symbol(whitham(), 1.0), math.sqrt(math.tanh(1.0)), places=14)
        self.assertAlmostEqual(
            eval_symbol(whitham(), 7.5), math.sqrt(math.tanh(7.5) / 7.5), places=14
        )

    def test_whitham_series_matches_closed_form(self):
        """Test the small-xi series joins the closed form."""
        xi = 2e-4
        self.assertAlmostEqual(
            eval_symbol(whitham(), 0.99e-4), math.sqrt(math.tanh(0.99e-4) / 0.99e-4), places=14
        )
        self.assertAlmostEqual(eval_symbol(whitham(), xi), math.sqrt(math.tanh(xi) / xi), places=14)

    def test_symbols_are_even(self):
        """Test m(-xi) = m(xi) for every built-in kind."""
        xi = np.array([0.3, 1.0, 4.0, 50.0])
        for spec in (whitham(), fkdv(1.5), kdv(), bo(), zero()):
            np.testing.assert_array_equal(eval_symbol(spec, xi), eval_symbol(spec, -xi))

    def test_power_laws(self):
        """Test fractional KdV, KdV and Benjamin-Ono exponents."""
        self.assertAlmostEqual(eval_symbol(fkdv(1.5), 4.0), 8.0, places=12)
        self.assertAlmostEqual(eval_symbol(kdv(), -3.0), 9.0, places=12)
        self.assertAlmostEqual(eval_symbol(bo(), -2.0), 2.0, places=12)
        self.assertEqual(eval_symbol(zero(), 5.0), 0.0)

    def test_array_in_array_out(self):
        """Test arrays keep their shape and scalars stay scalars."""
        out = eval_symbol(whitham(), np.linspace(-3, 3, 7))
        self.assertEqual(out.shape, (7,))
        self.assertIsInstance(eval_symbol(whitham(), 2.0), float)

    def test_non_finite_xi_rejected(self):
        """Test evaluation at nan raises."""
        with self.assertRaises(ConfigurationError):
            eval_symbol(whitham(), float("nan"))

    def test_negative_fkdv_exponent_rejected(self):
        """Test fkdv with a negative exponent raises."""
        with self.assertRaises(ConfigurationError):
            fkdv(-0.5)


class TestCustomSymbol(unittest.TestCase):
    """Tests for tabulated symbols."""

    def test_half_table_is_mirrored(self):
        """Test a table on xi >= 0 is extended evenly."""
        spec = custom([0.0, 1.0, 2.0], [1.0, 2.0, 3.0])
        self.assertEqual(spec.kind, SymbolKind.CUSTOM)
        self.assertAlmostEqual(eval_symbol(spec, -1.5), 2.5, places=14)
        self.assertAlmostEqual(eval_symbol(spec, 1.5), 2.5, places=14)

    def test_out_of_range_raises(self):
        """Test evaluation outside the table is refused, never extrapolated."""
        spec = custom([0.0, 1.0, 2.0], [1.0, 2.0, 3.0])
        with self.assertRaises(SymbolRangeError):
            eval_symbol(spec, 3.0)

    def test_uneven_full_table_rejected(self):
        """Test a table covering negative xi must be even."""
        with self.assertRaises(ConfigurationError):
            custom([-1.0, 0.0, 1.0], [2.0, 0.0, 1.0])

    def test_load_from_file(self):
        """Test loading a two-column table from disk."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "m.txt"
            xi = np.linspace(0.0, 10.0, 11)
            np.savetxt(path, np.column_stack([xi, 1.0 + xi]))
            spec = load_custom_symbol(path)
            self.assertAlmostEqual(eval_symbol(spec, -4.5), 5.5, places=12)
            self.assertEqual(spec.tail_threshold_N, 5.0)
            self.assertEqual(symbol_name(spec), f"custom:{path}")

    def test_missing_file(self):
        """Test a missing table file is a configuration error."""
        with self.assertRaises(ConfigurationError):
            load_custom_symbol("/nonexistent/table.txt")


class TestParseSymbol(unittest.TestCase):
    """Tests for symbol spellings."""

    def test_spellings_round_trip(self):
        """Test parse_symbol inverts symbol_name for built-ins."""
        for text in ("whitham", "kdv", "bo", "zero", "fkdv:1.5"):
            self.assertEqual(symbol_name(parse_symbol(text)), text)

    def test_fkdv_exponent(self):
        """Test the fkdv exponent is read."""
        self.assertEqual(parse_symbol("fkdv:0.75").alpha, 0.75)

    def test_unknown_spelling(self):
        """Test unknown or malformed spellings raise."""
        for text in ("burgers", "fkdv", "fkdv:abc", "kdv:2"):
            with self.assertRaises(ConfigurationError):
                parse_symbol(text)


class TestSymbolConditions(unittest.TestCase):
    """Tests for the structural checks."""

    def test_fkdv_exponent_fit(self):
        """Test the fitted growth exponent of |xi|^1.5."""
        report = check_symbol_conditions(fkdv(1.5))
        self.assertAlmostEqual(report.fitted_exponent, 1.5, delta=0.01)
        self.assertTrue(report.tail_finite)
        self.assertEqual(report.flags, [])

    def test_kdv_flagged(self):
        """Test KdV is flagged outside the gamma < 2 range."""
        report = check_symbol_conditions(kdv())
        self.assertTrue(any("gamma=2" in flag for flag in report.flags))

    def test_whitham_evenness_and_tail(self):
        """Test Whitham is exactly even with a finite tail constant."""
        report = check_symbol_conditions(whitham())
        self.assertEqual(report.evenness_defect, 0.0)
        self.assertTrue(report.tail_finite)
        self.assertAlmostEqual(report.fitted_exponent, -0.5, delta=0.05)
        self.assertEqual(report.flags, [])

    def test_zero_symbol_has_no_tail(self):
        """Test the zero symbol leaves no usable samples."""
        with self.assertRaises(InsufficientDataError):
            check_symbol_conditions(zero())

    def test_xi_max_below_threshold(self):
        """Test xi_max must exceed the tail threshold."""
        with self.assertRaises(ConfigurationError):
            check_symbol_conditions(whitham(), xi_max=5.0)

    def test_regimes(self):
        """Test which non-uniformity regimes apply."""
        self.assertEqual(nonuniformity_regimes(whitham(), 2.0), ["periodic", "line"])
        self.assertEqual(nonuniformity_regimes(kdv(), 2.0), ["periodic"])
        self.assertEqual(nonuniformity_regimes(fkdv(1.5), 0.5), ["periodic-lowreg", "line-lowreg"])
        self.assertEqual(nonuniformity_regimes(whitham(), 1.0), ["periodic-lowreg"])


if __name__ == "__main__":
    unittest.main()
