"""
Time integration of u_t + u u_x + L(u_x) = 0 on a periodic grid.

The linear part -i kappa m(kappa) is diagonal and purely imaginary, so it is
integrated exactly by an exponential time-differencing Runge-Kutta scheme of
fourth order (Cox-Matthews stages, Kassam-Trefethen coefficients). The
quadratic term is written in divergence form, -1/2 (u^2)_x, and evaluated
with the 3/2 dealiasing rule.
"""

import logging
import math
from collections import OrderedDict
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .errors import (
    ConfigurationError,
    FitFailure,
    InsufficientDataError,
    NumericalBlowupError,
    StepSizeUnderflowError,
)
from .models import Diagnostics, DtKind, Field, PeriodicGrid, SolverConfig, SymbolSpec
from .spectral import (
    cubic_integral,
    dealiased_product_coeffs,
    odd_wavenumbers,
    sobolev_norm_of_spectrum,
    symbol_table,
)

logger = logging.getLogger(__name__)


# Below this |z| the phi-functions are summed from their Taylor series.
TAYLOR_RADIUS = 0.5
TAYLOR_TERMS = 20

# Rows of the contour quadrature evaluated at once.
CONTOUR_CHUNK = 1 << 14

# Relative tolerance under which a norm counts as unchanged in the fits.
FIT_TOLERANCE = 1e-12

MAX_CACHED_STEPS = 4

Observer = Callable[[float, Field], None]


# ============================================================================
# Exponential integrator
# ============================================================================

def _phi_taylor(z: np.ndarray, k: int) -> np.ndarray:
    """phi_k(z) = sum_j z^j / (j + k)!, for small |z|."""
    total = np.zeros_like(z)
    term = np.full_like(z, 1.0 / math.factorial(k))
    for j in range(TAYLOR_TERMS):
        total = total + term
        term = term * z / (j + k + 1)
    return total


class ETDRK4Stepper:
    """
    Fourth-order exponential integrator for one (grid, symbol) pair.

    Works on coefficient arrays in rfft layout. Stage coefficients depend
    on dt only and are cached for the few step sizes a run uses.
    """

    def __init__(self, grid: PeriodicGrid, spec: SymbolSpec, contour_points: int = 32):
        self.grid = grid
        self.spec = spec
        self.contour_points = int(contour_points)
        self.kappa = odd_wavenumbers(grid)
        self.symbol = symbol_table(grid, spec)
        # Nyquist is an odd mode for the linear part as well.
        self.linear = -1j * self.kappa * self.symbol
        self._coefficients: OrderedDict = OrderedDict()

    def coefficients(self, dt: float) -> tuple:
        """(E, E2, Q, f1, f2, f3) for step size dt."""
        cached = self._coefficients.get(dt)
        if cached is not None:
            self._coefficients.move_to_end(dt)
            return cached

        z = dt * self.linear
        E = np.exp(z)
        E2 = np.exp(0.5 * z)
        Q = np.empty_like(z)
        f1 = np.empty_like(z)
        f2 = np.empty_like(z)
        f3 = np.empty_like(z)

        small = np.abs(z) < TAYLOR_RADIUS
        if np.any(small):
            zs = z[small]
            p1, p2, p3 = (_phi_taylor(zs, k) for k in (1, 2, 3))
            Q[small] = 0.5 * dt * _phi_taylor(0.5 * zs, 1)
            f1[small] = dt * (p1 - 3.0 * p2 + 4.0 * p3)
            f2[small] = dt * (p2 - 2.0 * p3)
            f3[small] = dt * (-p2 + 4.0 * p3)

        big = np.flatnonzero(~small)
        if big.size:
            roots = np.exp(2j * np.pi * (np.arange(self.contour_points) + 0.5) / self.contour_points)
            for start in range(0, big.size, CONTOUR_CHUNK):
                idx = big[start:start + CONTOUR_CHUNK]
                lr = z[idx, None] + roots[None, :]
                exp_lr = np.exp(lr)
                lr3 = lr ** 3
                Q[idx] = dt * ((np.exp(0.5 * lr) - 1.0) / lr).mean(axis=1)
                f1[idx] = dt * ((-4.0 - lr + exp_lr * (4.0 - 3.0 * lr + lr ** 2)) / lr3).mean(axis=1)
                f2[idx] = dt * ((2.0 + lr + exp_lr * (lr - 2.0)) / lr3).mean(axis=1)
                f3[idx] = dt * ((-4.0 - 3.0 * lr - lr ** 2 + exp_lr * (4.0 - lr)) / lr3).mean(axis=1)

        result = (E, E2, Q, f1, f2, f3)
        self._coefficients[dt] = result
        if len(self._coefficients) > MAX_CACHED_STEPS:
            self._coefficients.popitem(last=False)
        logger.debug("ETDRK4 coefficients for dt=%g on %d modes", dt, self.grid.n_modes)
        return result

    def nonlinear(self, c: np.ndarray) -> np.ndarray:
        """-1/2 d/dx (u^2) in coefficient space."""
        return -0.5j * self.kappa * dealiased_product_coeffs(c, c, self.grid.n_modes)

    def rhs(self, c: np.ndarray) -> np.ndarray:
        """Full right-hand side -u u_x - L(u_x)."""
        return self.linear * c + self.nonlinear(c)

    def advance(self, c: np.ndarray, dt: float) -> np.ndarray:
        E, E2, Q, f1, f2, f3 = self.coefficients(dt)
        Nv = self.nonlinear(c)
        a = E2 * c + Q * Nv
        Na = self.nonlinear(a)
        b = E2 * c + Q * Na
        Nb = self.nonlinear(b)
        cc = E2 * a + Q * (2.0 * Nb - Nv)
        Nc = self.nonlinear(cc)
        out = E * c + f1 * Nv + 2.0 * f2 * (Na + Nb) + f3 * Nc
        out[0] = out[0].real
        out[-1] = out[-1].real
        return out


@lru_cache(maxsize=8)
def get_stepper(grid: PeriodicGrid, spec: SymbolSpec, contour_points: int = 32) -> ETDRK4Stepper:
    return ETDRK4Stepper(grid, spec, contour_points)


def step(u: Field, dt: float, spec: SymbolSpec) -> Field:
    """
    Advance u by one ETDRK4 step of size dt.

    Raises:
        ConfigurationError: dt not positive
        NumericalBlowupError: the step produced non-finite values
    """
    if not dt > 0:
        raise ConfigurationError(f"step size must be positive, got {dt}")
    c = get_stepper(u.grid, spec).advance(u.spectrum, float(dt))
    if not np.all(np.isfinite(c)):
        raise NumericalBlowupError("non-finite values after one step", time=float(dt))
    return Field.from_spectrum(u.grid, c)


def rhs(u: Field, spec: SymbolSpec) -> Field:
    """u_t as given by the equation, -u u_x - L(u_x)."""
    return Field.from_spectrum(u.grid, get_stepper(u.grid, spec).rhs(u.spectrum))


# ============================================================================
# Conserved quantities and instrumentation
# ============================================================================

def conserved_quantities(u: Field, spec: SymbolSpec) -> tuple[float, float, float]:
    """
    (integral u, integral u^2, 1/2 integral u L u + 1/6 integral u^3).

    The quadratic terms are evaluated by Parseval and the cubic one on a
    refined grid, so all three are exact for the band-limited field.
    """
    grid = u.grid
    c = u.spectrum
    power = grid.parseval_weights * np.abs(c) ** 2
    mean = grid.length * c[0].real
    l2 = grid.length * float(np.sum(power))
    quadratic = 0.5 * grid.length * float(np.sum(power * symbol_table(grid, spec)))
    hamiltonian = quadratic + cubic_integral(u) / 6.0
    return float(mean), float(l2), float(hamiltonian)


def max_slope(u: Field) -> float:
    """max |u_x|, the wave-breaking signature."""
    return _max_slope_of(u.grid, u.spectrum)


def _max_slope_of(grid: PeriodicGrid, c: np.ndarray) -> float:
    ux = np.fft.irfft(1j * odd_wavenumbers(grid) * c * grid.n_modes, n=grid.n_modes)
    return float(np.max(np.abs(ux)))


def riccati_bound(norm0: float, c: float, t: float) -> float:
    """norm0 / (1 - t c norm0), or infinity once the denominator vanishes."""
    denominator = 1.0 - t * c * norm0
    if denominator <= 0:
        return math.inf
    return norm0 / denominator


def existence_time(norm0: float, c: float) -> float:
    """Length of the window on which riccati_bound stays finite."""
    product = c * norm0
    if product <= 0:
        return math.inf
    return 1.0 / product


def energy_bound(norm0_s: float, norm0_r: float, C: float, t: float) -> float:
    """exp(C t ||u0||_s) ||u0||_r, the propagation bound for a higher norm."""
    return math.exp(C * t * norm0_s) * norm0_r


def fit_cs(diag: Diagnostics) -> float:
    """
    Smallest c >= 0 with hs_norm[i] <= riccati_bound(hs_norm[0], c, times[i]).

    Each snapshot imposes c >= (1 - h0/h_i) / (t_i h0); the answer is the
    largest of these lower bounds, solved in closed form.

    Raises:
        InsufficientDataError: fewer than two finite snapshots
        FitFailure: the norm grew with no elapsed time, or grew from zero
    """
    times, norms = _finite_series(diag.times, diag.hs_norm)
    h0 = norms[0]
    best = 0.0
    for t, h in zip(times[1:], norms[1:]):
        if h <= h0 * (1.0 + FIT_TOLERANCE):
            continue
        if h0 == 0.0:
            raise FitFailure(f"H^s norm grew from zero to {h:g} at t={t:g}")
        elapsed = t - times[0]
        if elapsed <= 0:
            raise FitFailure(f"H^s norm jumped from {h0:g} to {h:g} with no elapsed time")
        best = max(best, (1.0 - h0 / h) / (elapsed * h0))
    return best


def fit_energy_constant(diag: Diagnostics) -> float:
    """
    Smallest C >= 0 with hr_norm[i] <= energy_bound(hs_norm[0], hr_norm[0], C, times[i]).

    Raises:
        InsufficientDataError: no auxiliary norm was recorded
        FitFailure: the bound cannot hold for any finite C
    """
    if diag.hr_norm is None:
        raise InsufficientDataError("no auxiliary norm recorded")
    times, hr = _finite_series(diag.times, diag.hr_norm)
    hs0 = diag.hs_norm[0]
    r0 = hr[0]
    best = 0.0
    for t, h in zip(times[1:], hr[1:]):
        if h <= r0 * (1.0 + FIT_TOLERANCE):
            continue
        elapsed = t - times[0]
        if r0 == 0.0 or hs0 == 0.0 or elapsed <= 0:
            raise FitFailure(
                f"auxiliary norm grew from {r0:g} to {h:g} at t={t:g}; no constant fits"
            )
        best = max(best, math.log(h / r0) / (elapsed * hs0))
    return best


def _finite_series(times, values) -> tuple[list[float], list[float]]:
    pairs = [(t, v) for t, v in zip(times, values) if math.isfinite(v)]
    if len(pairs) < 2:
        raise InsufficientDataError(f"need two finite snapshots, got {len(pairs)}")
    return [p[0] for p in pairs], [p[1] for p in pairs]


# ============================================================================
# Evolution
# ============================================================================

def _cfl_step(cfg: SolverConfig, grid: PeriodicGrid, amplitude: float) -> float:
    """Nonlinear CFL step, capped at dt_max and rounded down to a power of two."""
    if amplitude > 0:
        dt = cfg.dt_policy.value / (grid.kappa_max * amplitude)
    else:
        dt = cfg.dt_max
    dt = min(dt, cfg.dt_max)
    return 2.0 ** math.floor(math.log2(dt))


class _Recorder:
    """Accumulates snapshot diagnostics for evolve()."""

    def __init__(self, grid: PeriodicGrid, spec: SymbolSpec, cfg: SolverConfig, s: float,
                 observer: Optional[Observer]):
        self.grid = grid
        self.spec = spec
        self.s = s
        self.aux = cfg.aux_norm_index
        self.threshold = cfg.blowup_threshold
        self.observer = observer
        self.diag = Diagnostics(
            s=s,
            aux_index=self.aux,
            hr_norm=[] if self.aux is not None else None,
        )

    def snapshot(self, t: float, c: np.ndarray) -> Field:
        u = Field.from_spectrum(self.grid, c)
        mean, l2, ham = conserved_quantities(u, self.spec)
        slope = _max_slope_of(self.grid, c)
        d = self.diag
        d.times.append(float(t))
        d.mean.append(mean)
        d.l2.append(l2)
        d.hamiltonian.append(ham)
        d.hs_norm.append(sobolev_norm_of_spectrum(self.grid, c, self.s))
        d.max_slope.append(slope)
        if d.hr_norm is not None:
            d.hr_norm.append(sobolev_norm_of_spectrum(self.grid, c, self.aux))
        if self.observer is not None:
            self.observer(float(t), u)
        return u

    def fail(self, t: float, message: str, last: Optional[Field], exc_type=NumericalBlowupError,
             **kwargs):
        self.diag.status = "blowup"
        self.diag.breakdown_time = float(t)
        logger.warning("%s at t=%.6g", message, t)
        raise exc_type(f"{message} at t={t:.6g}", t, diagnostics=self.diag, field=last, **kwargs)


def evolve(u0: Field, spec: SymbolSpec, cfg: SolverConfig, s: float,
           observer: Optional[Observer] = None) -> tuple[Field, Diagnostics]:
    """
    Integrate from t = 0 to cfg.t_end.

    Snapshots are taken at t = 0, every `monitor_every` steps and at t_end;
    `observer(t, field)` is called at each. The last step is shortened so
    the run ends exactly at t_end.

    Raises:
        NumericalBlowupError: non-finite values, or max|u_x| above the
            blow-up threshold at a snapshot. Carries the partial diagnostics
            and the last finite field.
        StepSizeUnderflowError: the CFL step fell below dt_min.
    """
    grid = u0.grid
    stepper = get_stepper(grid, spec, cfg.contour_points)
    recorder = _Recorder(grid, spec, cfg, s, observer)

    c = np.array(u0.spectrum, dtype=complex)
    if not np.all(np.isfinite(c)):
        raise ConfigurationError("initial data contains non-finite values")
    last = recorder.snapshot(0.0, c)
    if recorder.diag.max_slope[-1] > cfg.blowup_threshold:
        recorder.fail(0.0, "initial slope above the blow-up threshold", last)

    t = 0.0
    steps = 0
    t_end = cfg.t_end
    fixed = cfg.dt_policy.kind == DtKind.FIXED
    while t < t_end:
        if fixed:
            dt = cfg.dt_policy.value
        else:
            amplitude = float(np.max(np.abs(np.fft.irfft(c * grid.n_modes, n=grid.n_modes))))
            dt = _cfl_step(cfg, grid, amplitude)
        remaining = t_end - t
        final = dt >= remaining * (1.0 - 1e-9)
        if final:
            if abs(remaining - dt) > 1e-12 * dt:
                dt = remaining
        elif dt < cfg.dt_min:
            recorder.fail(t, f"step size {dt:.3e} below dt_min={cfg.dt_min:.3e}", last,
                          exc_type=StepSizeUnderflowError, dt=dt)

        c = stepper.advance(c, dt)
        steps += 1
        t = t_end if final else t + dt
        recorder.diag.steps = steps

        if not np.all(np.isfinite(c)):
            recorder.fail(t, "non-finite values", last)
        if final or steps % cfg.monitor_every == 0:
            last = recorder.snapshot(t, c)
            slope = recorder.diag.max_slope[-1]
            if slope > cfg.blowup_threshold:
                recorder.fail(t, f"max|u_x|={slope:.3e} above the blow-up threshold", last)

    diag = recorder.diag
    if len(diag) >= 2:
        try:
            diag.fitted_cs = fit_cs(diag)
        except FitFailure as e:
            logger.warning("c_s fit failed: %s", e)
        if diag.hr_norm is not None:
            try:
                diag.fitted_energy_constant = fit_energy_constant(diag)
            except FitFailure as e:
                logger.warning("energy constant fit failed: %s", e)
    logger.debug("evolve: %d steps to t=%g on %d modes", steps, t_end, grid.n_modes)
    return last, diag


# ============================================================================
# Reference solutions
# ============================================================================

def reference_burgers(x, t: float):
    """
    Inviscid Burgers solution with data sin(x), by characteristics.

    u(x, t) = sin(x0) where x = x0 + t sin(x0); valid before breaking at t = 1.
    """
    if not 0 <= t < 1:
        raise ConfigurationError(f"characteristics cross at t=1; got t={t}")
    x = np.asarray(x, dtype=float)
    if t == 0:
        return np.sin(x)
    roots = np.array([
        brentq(lambda x0, xi=xi: x0 + t * np.sin(x0) - xi, xi - t, xi + t, xtol=1e-15, rtol=1e-15)
        for xi in np.atleast_1d(x)
    ])
    u = np.sin(roots)
    return u.reshape(x.shape)
