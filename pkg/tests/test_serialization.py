"""
Tests for serialization module.
"""

import json
import math
import tempfile
import unittest
from pathlib import Path

import numpy as np

from whitham_flowmap.errors import ConfigurationError
from whitham_flowmap.models import Diagnostics, ExperimentReport, SymbolKind
from whitham_flowmap.reports import add_verdict
from whitham_flowmap.serialization import (
    config_list,
    load_diagnostics_csv,
    load_field,
    load_report_document,
    load_run_config,
    render_json,
    save_diagnostics_csv,
    save_experiment_report,
    save_field_binary,
    save_field_csv,
    save_json,
    save_trajectories,
)
from whitham_flowmap.spectral import field_from_function, make_grid


class TestRenderJson(unittest.TestCase):
    """Tests for the report renderer."""

    def test_float_digits(self):
        """Test floats keep 17 significant digits and round-trip exactly."""
        text = render_json({"a": 0.1, "b": [1.0 / 3.0, 2]})
        self.assertIn("0.10000000000000001", text)
        self.assertEqual(json.loads(text)["b"][0], 1.0 / 3.0)

    def test_non_finite(self):
        """Test nan and infinities become strings."""
        doc = json.loads(render_json({"x": float("nan"), "y": [math.inf, -math.inf]}))
        self.assertEqual(doc, {"x": "nan", "y": ["inf", "-inf"]})

    def test_numpy_and_enums(self):
        """Test numpy scalars, arrays and enums are converted."""
        doc = json.loads(render_json({
            "n": np.int64(4),
            "v": np.array([0.5, 1.5]),
            "kind": SymbolKind.WHITHAM,
            "flag": True,
            "none": None,
        }))
        self.assertEqual(doc, {"n": 4, "v": [0.5, 1.5], "kind": "whitham", "flag": True,
                               "none": None})

    def test_key_order_preserved(self):
        """Test keys appear in insertion order."""
        text = render_json({"z": 1, "a": 2})
        self.assertLess(text.index('"z"'), text.index('"a"'))

    def test_unsupported_type(self):
        """Test arbitrary objects are refused."""
        with self.assertRaises(TypeError):
            render_json({"x": object()})


class TestReportFiles(unittest.TestCase):
    """Tests for report and trajectory files."""

    def setUp(self):
        """Set up test data."""
        self.report = ExperimentReport("demo")
        self.report.params.update({"tolerance": 1e-3, "n_list": [8, 16]})
        self.report.rows.append({"n": 8, "d0": 0.6266570686577501})
        add_verdict(self.report, "check", True, "tolerance", measured=2.5e-4)
        diag = Diagnostics(s=2.0)
        diag.times = [0.0, 0.5]
        diag.mean = [0.0, 0.0]
        diag.l2 = [math.pi, math.pi]
        diag.hamiltonian = [0.25, 0.25]
        diag.hs_norm = [1.0, 1.25]
        diag.max_slope = [1.0, 1.1]
        self.report.trajectories["n8"] = diag

    def test_report_is_deterministic(self):
        """Test equal reports render to identical bytes."""
        with tempfile.TemporaryDirectory() as tmp:
            a, b = Path(tmp) / "a.json", Path(tmp) / "b.json"
            save_experiment_report(self.report, a)
            save_experiment_report(self.report, b)
            self.assertEqual(a.read_bytes(), b.read_bytes())
            doc = load_report_document(a)
            self.assertEqual(doc["experiment_id"], "demo")
            self.assertEqual(doc["rows"][0]["d0"], 0.6266570686577501)
            self.assertNotIn("trajectories", doc)

    def test_trajectory_sidecars(self):
        """Test one CSV per trajectory, named after the experiment."""
        with tempfile.TemporaryDirectory() as tmp:
            paths = save_trajectories(self.report, Path(tmp) / "traj")
            self.assertEqual([p.name for p in paths], ["demo_n8.csv"])
            header = paths[0].read_text().splitlines()[0]
            self.assertEqual(header, "t,mean,l2,hamiltonian,hs_norm")

    def test_slope_column_optional(self):
        """Test max_slope is written only on request and read back when present."""
        diag = self.report.trajectories["n8"]
        with tempfile.TemporaryDirectory() as tmp:
            plain, sloped = Path(tmp) / "plain.csv", Path(tmp) / "sloped.csv"
            save_diagnostics_csv(diag, plain)
            save_diagnostics_csv(diag, sloped, include_slope=True)
            self.assertEqual(sloped.read_text().splitlines()[0],
                             "t,mean,l2,hamiltonian,hs_norm,max_slope")
            self.assertEqual(load_diagnostics_csv(plain, s=2.0).max_slope, [])
            self.assertEqual(load_diagnostics_csv(sloped, s=2.0).max_slope, diag.max_slope)

    def test_diagnostics_round_trip(self):
        """Test diagnostics CSV keeps every value."""
        diag = self.report.trajectories["n8"]
        diag.aux_index = 3.0
        diag.hr_norm = [2.0, 2.5]
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "d.csv"
            save_diagnostics_csv(diag, path)
            loaded = load_diagnostics_csv(path, s=2.0)
        self.assertEqual(loaded.times, diag.times)
        self.assertEqual(loaded.l2, diag.l2)
        self.assertEqual(loaded.hr_norm, diag.hr_norm)

    def test_save_json(self):
        """Test auxiliary JSON accepts numpy values."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "aux.json"
            save_json({"x": np.float64(1.5), "p": Path("out")}, path)
            self.assertEqual(json.loads(path.read_text()), {"x": 1.5, "p": "out"})


class TestFieldFiles(unittest.TestCase):
    """Tests for field snapshots."""

    def setUp(self):
        """Set up test data."""
        self.field = field_from_function(make_grid(2 * math.pi, 32), lambda x: np.sin(x) + 0.1)
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_binary_round_trip(self):
        """Test the binary layout and an exact reload."""
        path = self.dir / "u.bin"
        save_field_binary(self.field, path)
        self.assertEqual(path.stat().st_size, 16 + 8 * 32)
        loaded = load_field(path)
        self.assertEqual(loaded.grid, self.field.grid)
        np.testing.assert_array_equal(loaded.values, self.field.values)

    def test_truncated_binary(self):
        """Test a payload shorter than declared is refused."""
        path = self.dir / "u.bin"
        save_field_binary(self.field, path)
        path.write_bytes(path.read_bytes()[:-8])
        with self.assertRaises(ConfigurationError):
            load_field(path)

    def test_csv_round_trip(self):
        """Test the CSV reload recovers values and torus length."""
        path = self.dir / "u.csv"
        save_field_csv(self.field, path)
        loaded = load_field(path)
        np.testing.assert_array_equal(loaded.values, self.field.values)
        self.assertAlmostEqual(loaded.grid.length, 2 * math.pi, places=12)
        self.assertEqual(loaded.grid.n_modes, 32)

    def test_unknown_extension(self):
        """Test only .bin and .csv are read."""
        path = self.dir / "u.dat"
        path.write_text("0 1\n")
        with self.assertRaises(ConfigurationError):
            load_field(path)
        with self.assertRaises(ConfigurationError):
            load_field(self.dir / "missing.bin")


class TestRunConfig(unittest.TestCase):
    """Tests for JSON run configurations."""

    def setUp(self):
        """Set up test data."""
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_keys_normalized(self):
        """Test documentation keys are skipped and dashes read as underscores."""
        path = self.dir / "c.json"
        path.write_text(json.dumps({"_comment": "x", "t-star": 0.5, "symbol": "kdv"}))
        self.assertEqual(load_run_config(path), {"t_star": 0.5, "symbol": "kdv"})

    def test_bad_files(self):
        """Test missing, malformed and non-object configs."""
        with self.assertRaises(ConfigurationError):
            load_run_config(self.dir / "missing.json")
        bad = self.dir / "bad.json"
        bad.write_text("{not json")
        with self.assertRaises(ConfigurationError):
            load_run_config(bad)
        listed = self.dir / "list.json"
        listed.write_text("[1, 2]")
        with self.assertRaises(ConfigurationError):
            load_run_config(listed)

    def test_config_list(self):
        """Test lists from strings, arrays and scalars."""
        self.assertEqual(config_list("16, 32,64", int), [16, 32, 64])
        self.assertEqual(config_list([0.5, 1], float), [0.5, 1.0])
        self.assertEqual(config_list(8, int), [8])
        self.assertIsNone(config_list(None))
        with self.assertRaises(ConfigurationError):
            config_list("a,b", int)


if __name__ == "__main__":
    unittest.main()
