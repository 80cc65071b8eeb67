"""
Tests for solver module.
"""

import math
import unittest

import numpy as np

from whitham_flowmap.errors import (
    ConfigurationError,
    FitFailure,
    InsufficientDataError,
    NumericalBlowupError,
    StepSizeUnderflowError,
)
from whitham_flowmap.models import Diagnostics, DtPolicy, SolverConfig
from whitham_flowmap.solver import (
    conserved_quantities,
    energy_bound,
    evolve,
    existence_time,
    fit_cs,
    fit_energy_constant,
    get_stepper,
    max_slope,
    reference_burgers,
    rhs,
    riccati_bound,
    step,
)
from whitham_flowmap.spectral import constant_field, field_from_function, make_grid, zero_field
from whitham_flowmap.symbols import eval_symbol, kdv, whitham, zero


def _l2(a, b):
    return float(np.sqrt(a.grid.length / a.grid.n_modes * np.sum((a.values - b.values) ** 2)))


class TestStepper(unittest.TestCase):
    """Tests for the exponential integrator."""

    def setUp(self):
        """Set up test data."""
        self.grid = make_grid(2 * math.pi, 32)

    def test_phi_coefficients_consistent(self):
        """Test f1 + 4 f2 + f3 = (E - 1) / L on both sides of the Taylor radius."""
        stepper = get_stepper(self.grid, kdv())
        dt = 0.01
        E, _, _, f1, f2, f3 = stepper.coefficients(dt)
        z = dt * stepper.linear
        self.assertTrue(np.any(np.abs(z) < 0.5) and np.any(np.abs(z) > 0.5))
        lhs = f1 + 4.0 * f2 + f3
        nonzero = stepper.linear != 0
        expected = np.where(nonzero, (E - 1.0) / np.where(nonzero, stepper.linear, 1.0), dt)
        np.testing.assert_allclose(lhs, expected, rtol=1e-8, atol=1e-16)

    def test_coefficient_cache_bounded(self):
        """Test only a few step sizes are kept."""
        stepper = get_stepper(self.grid, whitham())
        for k in range(6):
            stepper.coefficients(2.0 ** -(k + 3))
        self.assertLessEqual(len(stepper._coefficients), 4)

    def test_step_of_zero_is_zero(self):
        """Test the zero field is a fixed point."""
        out = step(zero_field(self.grid), 0.1, whitham())
        np.testing.assert_array_equal(out.values, 0.0)

    def test_step_rejects_bad_dt(self):
        """Test dt must be positive."""
        with self.assertRaises(ConfigurationError):
            step(zero_field(self.grid), 0.0, whitham())

    def test_rhs_of_constant(self):
        """Test constants are stationary."""
        out = rhs(constant_field(self.grid, 2.0), whitham())
        np.testing.assert_allclose(out.values, 0.0, atol=1e-15)

    def test_linear_dispersion(self):
        """Test small data travels at the phase speed m(k)."""
        eps, k = 1e-8, 3
        u0 = field_from_function(self.grid, lambda x: eps * np.cos(k * x))
        cfg = SolverConfig(dt_policy=DtPolicy.fixed(0.01), t_end=1.0)
        u, _ = evolve(u0, whitham(), cfg, s=0.0)
        speed = eval_symbol(whitham(), float(k))
        expected = np.cos(k * (self.grid.x - speed))
        np.testing.assert_allclose(u.values / eps, expected, atol=1e-6)


class TestEvolve(unittest.TestCase):
    """Tests for evolve()."""

    def setUp(self):
        """Set up test data."""
        self.grid = make_grid(2 * math.pi, 256)
        self.u0 = field_from_function(self.grid, np.sin)

    def test_burgers_characteristics(self):
        """Test the zero symbol reproduces the Burgers solution before breaking."""
        cfg = SolverConfig(dt_policy=DtPolicy.fixed(2.0 ** -10), t_end=0.5)
        u, _ = evolve(self.u0, zero(), cfg, s=2.0)
        exact = reference_burgers(self.grid.x, 0.5)
        self.assertLess(float(np.max(np.abs(u.values - exact))), 1e-6)

    def test_fourth_order(self):
        """Test halving dt divides the t = 1 error against a dt/8 reference by about 16."""
        def run(dt):
            cfg = SolverConfig(dt_policy=DtPolicy.fixed(dt), t_end=1.0)
            return evolve(self.u0, whitham(), cfg, s=0.0)[0]

        dt = 2.0 ** -7
        ref = run(dt / 8)
        ratio = _l2(run(dt), ref) / _l2(run(dt / 2), ref)
        self.assertGreaterEqual(ratio, 12.0)
        self.assertLessEqual(ratio, 20.0)

    def test_conservation(self):
        """Test mean, L2 and Hamiltonian drifts stay at roundoff."""
        cfg = SolverConfig(dt_policy=DtPolicy.fixed(2.0 ** -10), t_end=1.0, monitor_every=16)
        _, diag = evolve(self.u0, whitham(), cfg, s=2.0)
        self.assertEqual(diag.status, "completed")
        self.assertLess(diag.relative_drift("l2"), 1e-10)
        self.assertLess(diag.relative_drift("hamiltonian"), 1e-8)
        self.assertLess(max(abs(m) for m in diag.mean), 1e-13)

    def test_ends_exactly_at_t_end(self):
        """Test the last CFL step is shortened to land on t_end."""
        cfg = SolverConfig(t_end=0.3, monitor_every=1000)
        _, diag = evolve(self.u0, whitham(), cfg, s=2.0)
        self.assertEqual(diag.times[0], 0.0)
        self.assertEqual(diag.times[-1], 0.3)
        self.assertEqual(len(diag), 2)
        self.assertEqual(diag.status, "completed")

    def test_observer_sees_every_snapshot(self):
        """Test the observer is called once per snapshot."""
        seen = []
        cfg = SolverConfig(dt_policy=DtPolicy.fixed(0.01), t_end=0.1, monitor_every=3)
        _, diag = evolve(self.u0, whitham(), cfg, s=2.0, observer=lambda t, u: seen.append(t))
        self.assertEqual(seen, diag.times)
        self.assertGreater(len(seen), 2)

    def test_aux_norm_and_fits(self):
        """Test an auxiliary index records hr_norm and both constants."""
        cfg = SolverConfig(dt_policy=DtPolicy.fixed(0.01), t_end=0.2, monitor_every=5,
                           aux_norm_index=3.0)
        _, diag = evolve(self.u0, whitham(), cfg, s=2.0)
        self.assertEqual(len(diag.hr_norm), len(diag))
        self.assertIsNotNone(diag.fitted_cs)
        self.assertIsNotNone(diag.fitted_energy_constant)
        self.assertGreaterEqual(diag.fitted_cs, 0.0)

    def test_blowup_detected(self):
        """Test Burgers steepening trips the slope threshold before t = 1."""
        grid = make_grid(2 * math.pi, 128)
        u0 = field_from_function(grid, np.sin)
        cfg = SolverConfig(dt_policy=DtPolicy.fixed(2.0 ** -8), t_end=2.0, monitor_every=1,
                           blowup_threshold=5.0)
        with self.assertRaises(NumericalBlowupError) as ctx:
            evolve(u0, zero(), cfg, s=2.0)
        e = ctx.exception
        self.assertGreaterEqual(e.time, 0.8)
        self.assertLessEqual(e.time, 1.0)
        self.assertEqual(e.diagnostics.status, "blowup")
        self.assertEqual(e.diagnostics.breakdown_time, e.time)
        self.assertIsNotNone(e.field)

    def test_step_size_underflow(self):
        """Test a CFL step below dt_min aborts the run."""
        grid = make_grid(2 * math.pi, 64)
        u0 = field_from_function(grid, lambda x: 10.0 * np.sin(x))
        cfg = SolverConfig(dt_max=0.05, dt_min=0.04, t_end=1.0)
        with self.assertRaises(StepSizeUnderflowError) as ctx:
            evolve(u0, whitham(), cfg, s=2.0)
        self.assertEqual(ctx.exception.time, 0.0)
        self.assertIsInstance(ctx.exception, NumericalBlowupError)


class TestConservedQuantities(unittest.TestCase):
    """Tests for conserved quantities and slopes."""

    def test_sine(self):
        """Test mean, L2 and Hamiltonian of sin x."""
        grid = make_grid(2 * math.pi, 32)
        u = field_from_function(grid, np.sin)
        mean, l2, ham = conserved_quantities(u, whitham())
        self.assertAlmostEqual(mean, 0.0, places=14)
        self.assertAlmostEqual(l2, math.pi, places=13)
        self.assertAlmostEqual(ham, 0.5 * math.pi * math.sqrt(math.tanh(1.0)), places=13)
        self.assertAlmostEqual(max_slope(u), 1.0, places=12)

    def test_cubic_term_sign(self):
        """Test the cubic term enters the Hamiltonian with a plus sign."""
        grid = make_grid(2 * math.pi, 32)
        u = field_from_function(grid, lambda x: 1.0 + np.cos(x))
        _, _, ham = conserved_quantities(u, whitham())
        # 1/2 (2 pi m(0) + pi m(1)) + (1/6) 5 pi, with m(0) = 1
        expected = 0.5 * (2 * math.pi + math.pi * math.sqrt(math.tanh(1.0))) + 5 * math.pi / 6
        self.assertAlmostEqual(ham, expected, places=12)


class TestBounds(unittest.TestCase):
    """Tests for the a priori bounds and their fits."""

    def _diag(self, times, norms, hr=None):
        diag = Diagnostics(s=2.0, aux_index=3.0 if hr is not None else None, hr_norm=hr)
        diag.times = list(times)
        diag.hs_norm = list(norms)
        return diag

    def test_riccati_and_existence(self):
        """Test the Riccati bound and its existence window."""
        self.assertEqual(riccati_bound(1.0, 0.5, 1.0), 2.0)
        self.assertEqual(riccati_bound(1.0, 1.0, 1.0), math.inf)
        self.assertEqual(existence_time(2.0, 0.25), 2.0)
        self.assertEqual(existence_time(1.0, 0.0), math.inf)
        self.assertEqual(energy_bound(1.0, 2.0, 0.0, 5.0), 2.0)

    def test_fit_cs(self):
        """Test the smallest c covering every snapshot."""
        c = fit_cs(self._diag([0.0, 1.0, 2.0], [1.0, 2.0, 4.0]))
        self.assertAlmostEqual(c, 0.5, places=14)
        self.assertLessEqual(4.0, riccati_bound(1.0, c, 2.0))

    def test_fit_cs_decreasing_norm(self):
        """Test a non-increasing norm needs c = 0."""
        self.assertEqual(fit_cs(self._diag([0.0, 1.0], [2.0, 1.0])), 0.0)

    def test_fit_cs_failures(self):
        """Test growth from zero fails and one snapshot is not enough."""
        with self.assertRaises(FitFailure):
            fit_cs(self._diag([0.0, 1.0], [0.0, 1.0]))
        with self.assertRaises(InsufficientDataError):
            fit_cs(self._diag([0.0], [1.0]))

    def test_fit_energy_constant(self):
        """Test C = log(hr / hr0) / (t ||u0||_s)."""
        diag = self._diag([0.0, 1.0], [2.0, 2.0], hr=[1.0, math.exp(2.0)])
        self.assertAlmostEqual(fit_energy_constant(diag), 1.0, places=12)
        with self.assertRaises(InsufficientDataError):
            fit_energy_constant(self._diag([0.0, 1.0], [1.0, 1.0]))


class TestReferenceBurgers(unittest.TestCase):
    """Tests for the characteristics solution."""

    def test_initial_and_range(self):
        """Test t = 0 gives sin x and t >= 1 is refused."""
        x = np.linspace(0, 2 * math.pi, 9)
        np.testing.assert_allclose(reference_burgers(x, 0.0), np.sin(x))
        with self.assertRaises(ConfigurationError):
            reference_burgers(x, 1.0)

    def test_solves_implicit_relation(self):
        """Test u = sin(x - t u)."""
        x = np.linspace(0, 2 * math.pi, 17)
        u = reference_burgers(x, 0.7)
        np.testing.assert_allclose(u, np.sin(x - 0.7 * u), atol=1e-13)


if __name__ == "__main__":
    unittest.main()
