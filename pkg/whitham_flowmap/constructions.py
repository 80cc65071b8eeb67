"""
Approximate-solution families and their closed-form residuals.

Two constructions are provided: the single-mode periodic family
u = omega/n + n^(-s) cos(-n m(n) t + n x - omega t) on the 2 pi torus, and
the two-scale family on the line (a low-frequency part evolved numerically
plus a high-frequency wave packet under a smooth envelope), emulated on a
long torus with the packet at its center.
"""

import logging
import math
from abc import ABC, abstractmethod
from collections import OrderedDict
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .errors import ConfigurationError, UnsupportedFamilyError
from .models import (
    Field,
    LineFamilyParams,
    PeriodicFamilyParams,
    PeriodicGrid,
    SolverConfig,
    SymbolSpec,
    is_power_of_two,
    MIN_MODES,
)
from .spectral import (
    dealiased_product_coeffs,
    make_grid,
    odd_wavenumbers,
    rescale_field,
    symbol_table,
    zero_field,
)
from .solver import evolve, rhs
from .symbols import eval_symbol

logger = logging.getLogger(__name__)


TWO_PI = 2.0 * math.pi

# The line torus must be at least this many envelope widths long.
MIN_PACKET_PERIODS = 8.0
DEFAULT_LINE_PERIODS = 32

# Outer fraction of the torus watched for wrap-around, and the pass level.
BOUNDARY_FRACTION = 0.1
BOUNDARY_TOLERANCE = 1e-10

PHASES = ("cos", "sin")

# States an EvolvedFamily keeps besides its initial data.
MAX_CACHED_STATES = 4


# ============================================================================
# Envelopes
# ============================================================================

def _smooth_step(y) -> np.ndarray:
    """C-infinity transition from 0 (y <= 0) to 1 (y >= 1)."""
    y = np.clip(np.asarray(y, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        h = np.where(y > 0, np.exp(-1.0 / np.where(y > 0, y, 1.0)), 0.0)
        hc = np.where(y < 1, np.exp(-1.0 / np.where(y < 1, 1.0 - y, 1.0)), 0.0)
    return h / (h + hc)


def _plateau(x, outer: float):
    a = np.abs(np.asarray(x, dtype=float))
    out = _smooth_step(outer - a)
    return float(out) if out.ndim == 0 else out


def bump(x):
    """phi: 1 on |x| <= 1, 0 on |x| >= 2, smooth and monotone in between."""
    return _plateau(x, 2.0)


def bump_tilde(x):
    """1 on |x| <= 2 (the support of phi), 0 on |x| >= 3."""
    return _plateau(x, 3.0)


@lru_cache(maxsize=None)
def _transition_l2() -> float:
    value, _ = quad(lambda y: float(_smooth_step(y)) ** 2, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    return value


@lru_cache(maxsize=None)
def bump_l2_norm() -> float:
    """||phi||_{L^2(R)} by adaptive quadrature of the transition profile."""
    return math.sqrt(2.0 * (1.0 + _transition_l2()))


@lru_cache(maxsize=None)
def bump_tilde_l2_norm() -> float:
    return math.sqrt(2.0 * (2.0 + _transition_l2()))


# ============================================================================
# Periodic family
# ============================================================================

def _require_periodic_torus(grid: PeriodicGrid):
    if abs(grid.length - TWO_PI) > 1e-12 * TWO_PI:
        raise ConfigurationError(
            f"the periodic family lives on the 2*pi torus, got length {grid.length}"
        )


def _require_resolved(grid: PeriodicGrid, frequency: float, what: str):
    # Products are truncated at the Nyquist mode, so it does not count as resolved.
    if not grid.resolves(frequency):
        raise ConfigurationError(
            f"{what} {frequency:g} is not resolved by {grid.n_modes} modes "
            f"(Nyquist wavenumber {grid.kappa_max:g})"
        )


def _phase_offset(p: PeriodicFamilyParams, spec: SymbolSpec, t: float) -> float:
    # phase = n x + offset, offset = -n m(n) t - omega t
    return -int(p.n) * eval_symbol(spec, int(p.n)) * t - p.omega * t


def _single_mode(grid: PeriodicGrid, k: int, coefficient: complex,
                 mean: float = 0.0) -> Field:
    # Built from exact coefficients so residual cancellations stay at roundoff.
    c = np.zeros(grid.n_modes // 2 + 1, dtype=complex)
    c[0] = mean
    c[k] = coefficient
    return Field.from_spectrum(grid, c)


def periodic_approx(p: PeriodicFamilyParams, spec: SymbolSpec, t: float,
                    grid: PeriodicGrid) -> Field:
    """
    u_n^omega(t) = omega/n + n^(-s) cos(phase) on the 2 pi torus.

    Raises:
        ConfigurationError: grid is not the 2 pi torus, or n >= N/2
    """
    _require_periodic_torus(grid)
    _require_resolved(grid, p.n, "frequency")
    n = int(p.n)
    amplitude = 0.5 * n ** (-p.s) * np.exp(1j * _phase_offset(p, spec, t))
    return _single_mode(grid, n, amplitude, mean=p.omega / n)


def periodic_time_derivative(p: PeriodicFamilyParams, spec: SymbolSpec, t: float,
                             grid: PeriodicGrid) -> Field:
    """d/dt u_n^omega = n^(-s) (n m(n) + omega) sin(phase)."""
    _require_periodic_torus(grid)
    _require_resolved(grid, p.n, "frequency")
    n = int(p.n)
    speed = n * eval_symbol(spec, n) + p.omega
    amplitude = -0.5j * speed * n ** (-p.s) * np.exp(1j * _phase_offset(p, spec, t))
    return _single_mode(grid, n, amplitude)


def periodic_error_exact(p: PeriodicFamilyParams, spec: SymbolSpec, t: float,
                         grid: PeriodicGrid) -> Field:
    """
    Closed-form residual E = -1/2 n^(1-2s) sin(2 phase) of u_n^omega.

    Raises:
        ConfigurationError: the doubled frequency 2n is not resolved
    """
    _require_periodic_torus(grid)
    _require_resolved(grid, 2 * p.n, "doubled frequency")
    n = int(p.n)
    amplitude = 0.25j * n ** (1.0 - 2.0 * p.s) * np.exp(2j * _phase_offset(p, spec, t))
    return _single_mode(grid, 2 * n, amplitude)


# ============================================================================
# Line family
# ============================================================================

def _require_packet_fits(p: LineFamilyParams, grid: PeriodicGrid):
    if grid.length < MIN_PACKET_PERIODS * p.envelope_scale * (1.0 - 1e-12):
        raise ConfigurationError(
            f"torus of length {grid.length:g} is shorter than "
            f"{MIN_PACKET_PERIODS:g} * lambda^delta = {MIN_PACKET_PERIODS * p.envelope_scale:g}"
        )


def line_grid(p: LineFamilyParams, periods: float = DEFAULT_LINE_PERIODS,
              modes: Optional[int] = None) -> PeriodicGrid:
    """
    Long torus of length periods * lambda^delta.

    Without `modes`, picks the smallest power of two whose Nyquist
    wavenumber reaches 2 lambda.
    """
    if periods < MIN_PACKET_PERIODS:
        raise ConfigurationError(
            f"line torus needs at least {MIN_PACKET_PERIODS:g} envelope widths, got {periods}"
        )
    length = periods * p.envelope_scale
    if modes is None:
        needed = 2.0 * p.lam * length / math.pi
        modes = max(MIN_MODES, 1 << max(0, math.ceil(math.log2(needed))))
    elif not is_power_of_two(int(modes)):
        raise ConfigurationError(f"n_modes must be a power of two, got {modes}")
    return make_grid(length, int(modes))


def _require_carrier_resolved(p: LineFamilyParams, grid: PeriodicGrid):
    if grid.kappa_max < 1.5 * p.lam:
        raise ConfigurationError(
            f"carrier frequency {p.lam:g} needs a Nyquist wavenumber of at least "
            f"{1.5 * p.lam:g}, grid has {grid.kappa_max:g}"
        )


def high_freq_phase(p: LineFamilyParams, spec: SymbolSpec, t: float, x) -> np.ndarray:
    """-lambda m(lambda) t + lambda x - omega t."""
    return -p.lam * eval_symbol(spec, p.lam) * t + p.lam * np.asarray(x) - p.omega * t


def _carrier(phase: str):
    if phase not in PHASES:
        raise ConfigurationError(f"phase must be one of {PHASES}, got {phase!r}")
    return np.cos if phase == "cos" else np.sin


def high_freq(p: LineFamilyParams, spec: SymbolSpec, t: float, grid: PeriodicGrid,
              phase: str = "cos") -> Field:
    """
    Wave packet lambda^(-delta/2 - s) phi(x / lambda^delta) cos(Phi).

    x is measured from the torus center. `phase="sin"` swaps the carrier.

    Raises:
        ConfigurationError: packet does not fit, or lambda is unresolved
    """
    carrier = _carrier(phase)
    _require_packet_fits(p, grid)
    _require_carrier_resolved(p, grid)
    x = grid.x_centered
    amplitude = p.lam ** (-0.5 * p.delta - p.s)
    envelope = bump(x / p.envelope_scale)
    return Field(grid, amplitude * envelope * carrier(high_freq_phase(p, spec, t, x)))


def high_freq_time_derivative(p: LineFamilyParams, spec: SymbolSpec, t: float,
                              grid: PeriodicGrid, phase: str = "cos") -> Field:
    """Analytic d/dt of high_freq(); the envelope is time independent."""
    _carrier(phase)
    _require_packet_fits(p, grid)
    _require_carrier_resolved(p, grid)
    x = grid.x_centered
    amplitude = p.lam ** (-0.5 * p.delta - p.s)
    speed = p.lam * eval_symbol(spec, p.lam) + p.omega
    theta = high_freq_phase(p, spec, t, x)
    # d/dt cos(theta) = speed sin(theta); d/dt sin(theta) = -speed cos(theta)
    dcarrier = np.sin(theta) if phase == "cos" else -np.cos(theta)
    return Field(grid, amplitude * speed * bump(x / p.envelope_scale) * dcarrier)


def low_freq_initial(p: LineFamilyParams, grid: PeriodicGrid) -> Field:
    """omega lambda^(-1) phi_tilde(x / lambda^delta), x from the torus center."""
    _require_packet_fits(p, grid)
    if p.omega == 0:
        return zero_field(grid)
    x = grid.x_centered
    return Field(grid, p.omega / p.lam * bump_tilde(x / p.envelope_scale))


def boundary_contamination(f: Field) -> float:
    """max|f| on the outer 10% of the torus, relative to max|f|."""
    peak = f.max_abs()
    if peak == 0:
        return 0.0
    outer = np.abs(f.grid.x_centered) > (0.5 - BOUNDARY_FRACTION) * f.grid.length
    return float(np.max(np.abs(f.values[outer])) / peak)


def boundary_clean(f: Field) -> bool:
    return boundary_contamination(f) < BOUNDARY_TOLERANCE


# ============================================================================
# Time-parameterized families
# ============================================================================

class FieldFamily(ABC):
    """A field depending on time, sampled on a fixed grid."""

    def __init__(self, grid: PeriodicGrid):
        self.grid = grid

    @abstractmethod
    def at(self, t: float) -> Field:
        """The family member at time t."""

    def time_derivative(self, t: float) -> Field:
        raise UnsupportedFamilyError(
            f"{type(self).__name__} provides no analytic time derivative"
        )


class ConstantFamily(FieldFamily):
    """A time-independent field."""

    def __init__(self, field: Field):
        super().__init__(field.grid)
        self.field = field

    def at(self, t: float) -> Field:
        return self.field

    def time_derivative(self, t: float) -> Field:
        return zero_field(self.grid)


class PeriodicFamily(FieldFamily):

    def __init__(self, params: PeriodicFamilyParams, spec: SymbolSpec, grid: PeriodicGrid):
        super().__init__(grid)
        self.params = params
        self.spec = spec

    def at(self, t: float) -> Field:
        return periodic_approx(self.params, self.spec, t, self.grid)

    def time_derivative(self, t: float) -> Field:
        return periodic_time_derivative(self.params, self.spec, t, self.grid)


class HighFrequencyFamily(FieldFamily):

    def __init__(self, params: LineFamilyParams, spec: SymbolSpec, grid: PeriodicGrid,
                 phase: str = "cos"):
        super().__init__(grid)
        self.params = params
        self.spec = spec
        self.phase = phase

    def at(self, t: float) -> Field:
        return high_freq(self.params, self.spec, t, self.grid, phase=self.phase)

    def time_derivative(self, t: float) -> Field:
        return high_freq_time_derivative(self.params, self.spec, t, self.grid, phase=self.phase)


class EvolvedFamily(FieldFamily):
    """
    Numerical solution from given data, computed lazily.

    The initial state and the MAX_CACHED_STATES most recently used states
    are kept; later requests restart from the closest earlier one.
    """

    def __init__(self, u0: Field, spec: SymbolSpec, cfg: SolverConfig, s: float = 0.0):
        super().__init__(u0.grid)
        self.spec = spec
        self.cfg = cfg
        self.s = s
        self._states: OrderedDict[float, Field] = OrderedDict({0.0: u0})

    def at(self, t: float) -> Field:
        t = float(t)
        if t < 0:
            raise ConfigurationError(f"time must be nonnegative, got {t}")
        if t in self._states:
            self._states.move_to_end(t)
            return self._states[t]
        start = max(tt for tt in self._states if tt <= t)
        u, _ = evolve(self._states[start], self.spec, self.cfg.with_t_end(t - start), self.s)
        self._remember(t, u)
        return u

    def _remember(self, t: float, u: Field):
        self._states[t] = u
        self._states.move_to_end(t)
        # t = 0 is never evicted, so every request has a starting state.
        while len(self._states) > MAX_CACHED_STATES + 1:
            oldest = next(tt for tt in self._states if tt != 0.0)
            del self._states[oldest]

    def seed(self, t: float, u: Field):
        """Record a state computed elsewhere, e.g. by an instrumented evolve()."""
        if u.grid != self.grid:
            raise ConfigurationError(f"state lives on {u.grid}, not {self.grid}")
        self._remember(float(t), u)

    def time_derivative(self, t: float) -> Field:
        return rhs(self.at(t), self.spec)


class LineFamily(FieldFamily):
    """
    u^{omega,lambda} = u_l + u^h.

    u_l is evolved numerically from low_freq_initial(); u^h is the analytic
    wave packet.
    """

    def __init__(self, params: LineFamilyParams, spec: SymbolSpec, grid: PeriodicGrid,
                 cfg: SolverConfig, phase: str = "cos"):
        super().__init__(grid)
        self.params = params
        self.spec = spec
        self.low = EvolvedFamily(low_freq_initial(params, grid), spec, cfg, params.s)
        self.high = HighFrequencyFamily(params, spec, grid, phase)

    def at(self, t: float) -> Field:
        return self.low.at(t) + self.high.at(t)

    def time_derivative(self, t: float) -> Field:
        return self.low.time_derivative(t) + self.high.time_derivative(t)


class RescaledFamily(FieldFamily):
    """v(t, x) = u(lambda^(-delta) t, lambda^(-delta) x) on a longer torus."""

    def __init__(self, base: FieldFamily, lam: float, delta: float, target: PeriodicGrid):
        super().__init__(target)
        self.base = base
        self.factor = float(lam) ** (-float(delta))

    def at(self, t: float) -> Field:
        return rescale_field(self.base.at(self.factor * t), self.grid)

    def time_derivative(self, t: float) -> Field:
        return rescale_field(self.base.time_derivative(self.factor * t), self.grid) * self.factor


def rescale_solution(u: FieldFamily, lam: float, delta: float,
                     target: Optional[PeriodicGrid] = None) -> RescaledFamily:
    """
    Rescale a family to v(t, x) = u(lambda^(-delta) t, lambda^(-delta) x).

    The default target is the torus lambda^delta times longer with the
    same number of modes.

    Raises:
        ConfigurationError: target has the wrong length or too few modes
    """
    scale = float(lam) ** float(delta)
    expected = scale * u.grid.length
    if target is None:
        target = make_grid(expected, u.grid.n_modes)
    if abs(target.length - expected) > 1e-12 * expected:
        raise ConfigurationError(
            f"rescaled torus must have length {expected:g}, got {target.length:g}"
        )
    if target.n_modes < u.grid.n_modes:
        raise ConfigurationError(
            f"target grid has {target.n_modes} modes, fewer than the source's {u.grid.n_modes}"
        )
    return RescaledFamily(u, lam, delta, target)


def residual(family: FieldFamily, spec: SymbolSpec, t: float,
             grid: Optional[PeriodicGrid] = None) -> Field:
    """
    u_t + u u_x + L(u_x) for a family with an analytic time derivative.

    Raises:
        UnsupportedFamilyError: the family has no analytic time derivative
        ConfigurationError: `grid` differs from the family's grid
    """
    if grid is not None and grid != family.grid:
        raise ConfigurationError(f"family lives on {family.grid}, not {grid}")
    # Summed in coefficient space, before any inverse FFT.
    dudt = family.time_derivative(t).spectrum
    c = family.at(t).spectrum
    grid = family.grid
    cx = 1j * odd_wavenumbers(grid) * c
    coeffs = dudt + dealiased_product_coeffs(c, cx, grid.n_modes) + symbol_table(grid, spec) * cx
    return Field.from_spectrum(grid, coeffs)
