"""
Data models for the flow-map toolkit.

Symbols, grids and fields are immutable; diagnostics and reports are
plain containers filled in by the solver and the experiment drivers.
All spectra use the coefficient-normalized convention
f(x_j) = sum_k c_k exp(i kappa_k x_j), stored in numpy rfft layout
(k = 0 .. n_modes/2, the last entry being the unpaired Nyquist mode).
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Any, Optional

import numpy as np

from .errors import ConfigurationError


MIN_MODES = 8


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


class SymbolKind(Enum):
    WHITHAM = "whitham"
    FKDV = "fkdv"
    KDV = "kdv"
    BO = "bo"
    ZERO = "zero"
    CUSTOM = "custom"


class DtKind(Enum):
    FIXED = "fixed"
    CFL = "cfl"


@dataclass(frozen=True)
class SymbolSpec:
    """
    A Fourier multiplier m(xi) together with its declared growth data.

    `alpha` is the homogeneity exponent of the power-law kinds (fkdv, kdv,
    bo). Custom symbols carry their table as tuples so the SymbolSpec stays
    hashable; the table always covers a symmetric interval.
    """
    kind: SymbolKind
    growth_exponent_p: float = 0.0
    gamma: Optional[float] = None
    lower_exponent_r: Optional[float] = None
    tail_threshold_N: float = 1.0
    alpha: Optional[float] = None
    table_xi: Optional[tuple] = None
    table_m: Optional[tuple] = None
    source: str = ""

    def __post_init__(self):
        if self.growth_exponent_p < 0:
            raise ConfigurationError(
                f"growth exponent p must be nonnegative, got {self.growth_exponent_p}"
            )
        if self.gamma is not None and not 0 <= self.gamma:
            raise ConfigurationError(f"gamma must be nonnegative, got {self.gamma}")
        if self.tail_threshold_N <= 0:
            raise ConfigurationError(
                f"tail threshold N must be positive, got {self.tail_threshold_N}"
            )
        if self.kind == SymbolKind.CUSTOM and (self.table_xi is None or self.table_m is None):
            raise ConfigurationError("custom symbols need a tabulated (xi, m) table")

    @property
    def is_homogeneous(self) -> bool:
        """Power-law symbols |xi|^alpha."""
        return self.kind in (SymbolKind.FKDV, SymbolKind.KDV, SymbolKind.BO)


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform discretization of a torus of circumference `length`."""
    length: float
    n_modes: int

    def __post_init__(self):
        if not (self.length > 0 and math.isfinite(self.length)):
            raise ConfigurationError(f"torus length must be positive, got {self.length}")
        if not isinstance(self.n_modes, (int, np.integer)) or not is_power_of_two(int(self.n_modes)):
            raise ConfigurationError(
                f"n_modes must be a power of two, got {self.n_modes}"
            )
        if self.n_modes < MIN_MODES:
            raise ConfigurationError(
                f"n_modes must be at least {MIN_MODES}, got {self.n_modes}"
            )

    @cached_property
    def x(self) -> np.ndarray:
        """Collocation points x_j = j L / N."""
        return np.arange(self.n_modes) * (self.length / self.n_modes)

    @cached_property
    def x_centered(self) -> np.ndarray:
        """Collocation points measured from the torus center."""
        return self.x - 0.5 * self.length

    @property
    def dk(self) -> float:
        return 2.0 * math.pi / self.length

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """kappa_k for k = -N/2 .. N/2 - 1 (index 0 is the Nyquist mode)."""
        k = np.arange(-self.n_modes // 2, self.n_modes // 2)
        return self.dk * k

    @cached_property
    def rwavenumbers(self) -> np.ndarray:
        """kappa_k for k = 0 .. N/2 in rfft layout; the last entry is Nyquist."""
        return self.dk * np.arange(self.n_modes // 2 + 1)

    @cached_property
    def parseval_weights(self) -> np.ndarray:
        """Multiplicity of each rfft coefficient in the full spectrum."""
        w = np.full(self.n_modes // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w

    @property
    def kappa_max(self) -> float:
        """Magnitude of the Nyquist wavenumber."""
        return math.pi * self.n_modes / self.length

    def resolves(self, kappa: float) -> bool:
        """True when |kappa| sits strictly below the Nyquist wavenumber."""
        return abs(kappa) < self.kappa_max * (1.0 - 1e-12)


@dataclass(frozen=True, eq=False)
class Field:
    """
    A real grid function; the spectrum is derived lazily and cached.

    Fields are value objects: operations return new fields and the
    collocation array is marked read-only.
    """
    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n_modes,):
            raise ConfigurationError(
                f"field needs {self.grid.n_modes} values, got shape {values.shape}"
            )
        if values.flags.writeable:
            values = values.copy()
            values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_spectrum(cls, grid: PeriodicGrid, coeffs: np.ndarray) -> "Field":
        c = np.array(coeffs, dtype=complex)
        c[0] = c[0].real
        c[-1] = c[-1].real
        values = np.fft.irfft(c * grid.n_modes, n=grid.n_modes)
        f = cls(grid, values)
        c.flags.writeable = False
        f.__dict__["spectrum"] = c
        return f

    @cached_property
    def spectrum(self) -> np.ndarray:
        c = np.fft.rfft(self.values) / self.grid.n_modes
        c.flags.writeable = False
        return c

    def _check_same_grid(self, other: "Field"):
        if other.grid != self.grid:
            raise ConfigurationError(
                f"grid mismatch: {self.grid} vs {other.grid}"
            )

    def __add__(self, other):
        if isinstance(other, Field):
            self._check_same_grid(other)
            return Field(self.grid, self.values + other.values)
        return Field(self.grid, self.values + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Field):
            self._check_same_grid(other)
            return Field(self.grid, self.values - other.values)
        return Field(self.grid, self.values - float(other))

    def __neg__(self):
        return Field(self.grid, -self.values)

    def __mul__(self, scalar):
        if isinstance(scalar, Field):
            raise TypeError("use spectral.dealiased_product for products of fields")
        return Field(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class DtPolicy:
    """Fixed step, or nonlinear CFL dt = safety / (kappa_max max|u|)."""
    kind: DtKind
    value: float

    def __post_init__(self):
        if self.kind == DtKind.FIXED and not self.value > 0:
            raise ConfigurationError(f"fixed dt must be positive, got {self.value}")
        if self.kind == DtKind.CFL and not 0 < self.value <= 1:
            raise ConfigurationError(f"CFL safety must lie in (0, 1], got {self.value}")

    @classmethod
    def fixed(cls, dt: float) -> "DtPolicy":
        return cls(DtKind.FIXED, float(dt))

    @classmethod
    def cfl(cls, safety: float = 0.5) -> "DtPolicy":
        return cls(DtKind.CFL, float(safety))


@dataclass(frozen=True)
class SolverConfig:
    """Integrator parameters."""
    dt_policy: DtPolicy = field(default_factory=DtPolicy.cfl)
    t_end: float = 1.0
    monitor_every: int = 10
    blowup_threshold: float = 1e3
    dt_max: float = 0.05
    dt_min: float = 1e-10
    aux_norm_index: Optional[float] = None
    contour_points: int = 32

    def __post_init__(self):
        if not self.t_end >= 0:
            raise ConfigurationError(f"t_end must be nonnegative, got {self.t_end}")
        if int(self.monitor_every) < 1:
            raise ConfigurationError(
                f"monitor_every must be at least 1, got {self.monitor_every}"
            )
        if not self.blowup_threshold > 0:
            raise ConfigurationError(
                f"blowup threshold must be positive, got {self.blowup_threshold}"
            )
        if not 0 < self.dt_min <= self.dt_max:
            raise ConfigurationError(
                f"need 0 < dt_min <= dt_max, got {self.dt_min}, {self.dt_max}"
            )

    def with_t_end(self, t_end: float) -> "SolverConfig":
        return replace(self, t_end=float(t_end))


@dataclass
class Diagnostics:
    """Snapshot series recorded by evolve()."""
    s: float
    times: list[float] = field(default_factory=list)
    mean: list[float] = field(default_factory=list)
    l2: list[float] = field(default_factory=list)
    hamiltonian: list[float] = field(default_factory=list)
    hs_norm: list[float] = field(default_factory=list)
    max_slope: list[float] = field(default_factory=list)
    aux_index: Optional[float] = None
    hr_norm: Optional[list[float]] = None
    fitted_cs: Optional[float] = None
    fitted_energy_constant: Optional[float] = None
    status: str = "completed"
    breakdown_time: Optional[float] = None
    steps: int = 0

    def __len__(self) -> int:
        return len(self.times)

    def relative_drift(self, name: str) -> float:
        """max |q(t) - q(0)| / max(|q(0)|, tiny) for a recorded series."""
        series = np.asarray(getattr(self, name), dtype=float)
        if series.size == 0:
            return 0.0
        scale = max(abs(series[0]), np.finfo(float).tiny)
        return float(np.max(np.abs(series - series[0])) / scale)


@dataclass(frozen=True)
class PeriodicFamilyParams:
    """Parameters of the periodic approximate-solution family."""
    n: int
    omega: float
    s: float

    def __post_init__(self):
        if int(self.n) < 1:
            raise ConfigurationError(f"frequency n must be at least 1, got {self.n}")
        if not self.s > 0:
            raise ConfigurationError(f"Sobolev index s must be positive, got {self.s}")


@dataclass(frozen=True)
class LineFamilyParams:
    """Parameters of the two-scale family on the line."""
    lam: float
    delta: float
    omega: float
    s: float
    bump_kind: str = "standard"

    def __post_init__(self):
        if not self.lam >= 1:
            raise ConfigurationError(f"lambda must be at least 1, got {self.lam}")
        if not 1 < self.delta < 2:
            raise ConfigurationError(f"delta must lie in (1, 2), got {self.delta}")
        if not self.s > 0:
            raise ConfigurationError(f"Sobolev index s must be positive, got {self.s}")
        if self.bump_kind != "standard":
            raise ConfigurationError(f"unknown bump kind {self.bump_kind!r}")

    @property
    def envelope_scale(self) -> float:
        """lambda ** delta, the width scale of the envelopes."""
        return self.lam ** self.delta


@dataclass
class ConditionReport:
    """Outcome of the numerical check of a symbol's structural hypotheses."""
    symbol: str
    xi_max: float
    n_samples: int
    n_tail_samples: int
    evenness_defect: float
    fitted_exponent: float
    fit_halfwidth: float
    declared_p: float
    declared_gamma: Optional[float]
    declared_r: Optional[float]
    gamma_used: float
    tail_constant: Optional[float]
    tail_status: str
    flags: list[str] = field(default_factory=list)

    @property
    def tail_finite(self) -> bool:
        return self.tail_status == "finite"


@dataclass
class ExperimentReport:
    """
    Tabulated measurements, slope fits and verdicts of one experiment.

    `trajectories` holds per-instance diagnostics for the CSV sidecars;
    it is not part of the report document.
    """
    experiment_id: str
    params: dict[str, Any] = field(default_factory=dict)
    rows: list[dict[str, Any]] = field(default_factory=list)
    slopes: dict[str, dict[str, float]] = field(default_factory=dict)
    verdicts: dict[str, dict[str, Any]] = field(default_factory=dict)
    trajectories: dict[str, Diagnostics] = field(default_factory=dict, repr=False, compare=False)

    @property
    def passed(self) -> bool:
        """True when every verdict passed."""
        return all(v["passed"] for v in self.verdicts.values())

    @property
    def failed_verdicts(self) -> list[str]:
        return [name for name, v in self.verdicts.items() if not v["passed"]]
