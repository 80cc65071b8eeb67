"""
Catalog and evaluation of Fourier multiplier symbols m(xi).

Also checks numerically the structural hypotheses the non-uniformity
results place on m: evenness, polynomial growth and the tail Lipschitz
condition |m(xi + y) - m(xi)| <= C |y| |xi|^(gamma - 1).
"""

import logging
from pathlib import Path
from typing import Union

import numpy as np

from .errors import ConfigurationError, InsufficientDataError, SymbolRangeError
from .models import ConditionReport, SymbolKind, SymbolSpec
from .reports import fit_loglog_slope

logger = logging.getLogger(__name__)


# Below this |xi| the Whitham symbol is evaluated from its Taylor series.
WHITHAM_SERIES_CUTOFF = 1e-4

# Probe offsets, as fractions of the local sample spacing.
TAIL_PROBE_FRACTIONS = (1e-1, 1e-2, 1e-3)

# A tail ratio growing faster than xi^TAIL_GROWTH_TOLERANCE counts as violated.
TAIL_GROWTH_TOLERANCE = 0.05

EXPONENT_TOLERANCE = 0.05


# ============================================================================
# Catalog
# ============================================================================

def whitham() -> SymbolSpec:
    """m(xi) = sqrt(tanh(xi) / xi), decaying like |xi|^(-1/2)."""
    return SymbolSpec(
        kind=SymbolKind.WHITHAM,
        growth_exponent_p=0.0,
        gamma=0.0,
        lower_exponent_r=None,
        tail_threshold_N=10.0,
    )


def fkdv(alpha: float) -> SymbolSpec:
    """Fractional KdV symbol |xi|^alpha."""
    alpha = float(alpha)
    if not alpha >= 0:
        raise ConfigurationError(f"fkdv exponent must be nonnegative, got {alpha}")
    return SymbolSpec(
        kind=SymbolKind.FKDV,
        growth_exponent_p=alpha,
        gamma=alpha,
        lower_exponent_r=alpha,
        tail_threshold_N=1.0,
        alpha=alpha,
    )


def kdv() -> SymbolSpec:
    """KdV dispersion, |xi|^2."""
    return SymbolSpec(
        kind=SymbolKind.KDV, growth_exponent_p=2.0, gamma=2.0,
        lower_exponent_r=2.0, tail_threshold_N=1.0, alpha=2.0,
    )


def bo() -> SymbolSpec:
    """Benjamin-Ono dispersion, |xi|."""
    return SymbolSpec(
        kind=SymbolKind.BO, growth_exponent_p=1.0, gamma=1.0,
        lower_exponent_r=1.0, tail_threshold_N=1.0, alpha=1.0,
    )


def zero() -> SymbolSpec:
    """No dispersion (inviscid Burgers)."""
    return SymbolSpec(kind=SymbolKind.ZERO, growth_exponent_p=0.0, gamma=0.0,
                      tail_threshold_N=1.0)


def custom(xi, m, *, growth_exponent_p: float = 0.0, gamma=None,
           lower_exponent_r=None, tail_threshold_N=None, source: str = "",
           even_tolerance: float = 1e-12) -> SymbolSpec:
    """
    Build a tabulated symbol, linearly interpolated and never extrapolated.

    A table covering only xi >= 0 is mirrored. A table that already covers
    negative xi must be even to `even_tolerance`.
    """
    xi = np.asarray(xi, dtype=float)
    m = np.asarray(m, dtype=float)
    if xi.ndim != 1 or xi.shape != m.shape or xi.size < 2:
        raise ConfigurationError("custom symbol table needs two equal-length columns")
    if not (np.all(np.isfinite(xi)) and np.all(np.isfinite(m))):
        raise ConfigurationError("custom symbol table contains non-finite entries")
    order = np.argsort(xi)
    xi, m = xi[order], m[order]
    if np.any(np.diff(xi) <= 0):
        raise ConfigurationError("custom symbol table has repeated xi values")

    if xi[0] >= 0:
        if xi[0] == 0:
            xi = np.concatenate([-xi[:0:-1], xi])
            m = np.concatenate([m[:0:-1], m])
        else:
            xi = np.concatenate([-xi[::-1], xi])
            m = np.concatenate([m[::-1], m])
    else:
        mirrored = np.interp(-xi, xi, m)
        defect = float(np.max(np.abs(mirrored - m)))
        if defect > even_tolerance * max(1.0, float(np.max(np.abs(m)))):
            raise ConfigurationError(
                f"custom symbol table is not even (defect {defect:.3e})"
            )

    extent = float(min(-xi[0], xi[-1]))
    if tail_threshold_N is None:
        tail_threshold_N = 0.5 * extent
    return SymbolSpec(
        kind=SymbolKind.CUSTOM,
        growth_exponent_p=float(growth_exponent_p),
        gamma=None if gamma is None else float(gamma),
        lower_exponent_r=None if lower_exponent_r is None else float(lower_exponent_r),
        tail_threshold_N=float(tail_threshold_N),
        table_xi=tuple(xi.tolist()),
        table_m=tuple(m.tolist()),
        source=str(source),
    )


def load_custom_symbol(path: Union[str, Path]) -> SymbolSpec:
    """Load a two-column text table (xi, m(xi))."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"custom symbol file not found: {path}")
    table = np.loadtxt(path, ndmin=2)
    if table.shape[1] != 2:
        raise ConfigurationError(
            f"custom symbol file must have two columns, got {table.shape[1]}"
        )
    return custom(table[:, 0], table[:, 1], source=str(path))


def parse_symbol(text: str) -> SymbolSpec:
    """Parse `whitham`, `kdv`, `bo`, `zero`, `fkdv:<alpha>` or `custom:<path>`."""
    text = text.strip()
    name, _, arg = text.partition(":")
    name = name.lower()
    if name == "whitham" and not arg:
        return whitham()
    if name == "kdv" and not arg:
        return kdv()
    if name == "bo" and not arg:
        return bo()
    if name == "zero" and not arg:
        return zero()
    if name == "fkdv" and arg:
        try:
            return fkdv(float(arg))
        except ValueError as e:
            if isinstance(e, ConfigurationError):
                raise
            raise ConfigurationError(f"bad fkdv exponent in {text!r}") from e
    if name == "custom" and arg:
        return load_custom_symbol(arg)
    raise ConfigurationError(
        f"unknown symbol {text!r}; expected whitham, kdv, bo, zero, "
        f"fkdv:<alpha> or custom:<path>"
    )


def symbol_name(spec: SymbolSpec) -> str:
    """Spelling of a symbol as accepted by parse_symbol()."""
    if spec.kind == SymbolKind.FKDV:
        return f"fkdv:{spec.alpha:g}"
    if spec.kind == SymbolKind.CUSTOM:
        return f"custom:{spec.source}" if spec.source else "custom"
    return spec.kind.value


# ============================================================================
# Evaluation
# ============================================================================

def _whitham(a: np.ndarray) -> np.ndarray:
    out = np.empty_like(a)
    small = a < WHITHAM_SERIES_CUTOFF
    if np.any(small):
        z = a[small] ** 2
        # tanh(x)/x = 1 - x^2/3 + 2x^4/15 - 17x^6/315 + ...
        out[small] = np.sqrt(1.0 - z / 3.0 + 2.0 * z * z / 15.0 - 17.0 * z ** 3 / 315.0)
    big = ~small
    if np.any(big):
        out[big] = np.sqrt(np.tanh(a[big]) / a[big])
    return out


def eval_symbol(spec: SymbolSpec, xi):
    """
    Evaluate m at xi (scalar or array).

    Built-in kinds are evaluated at |xi|, so evenness is exact. Custom
    symbols are interpolated on their full table.

    Raises:
        ConfigurationError: non-finite xi
        SymbolRangeError: custom symbol evaluated outside its table
    """
    arr = np.asarray(xi, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError("symbol evaluated at a non-finite xi")
    a = np.abs(arr)

    if spec.kind == SymbolKind.WHITHAM:
        out = _whitham(a)
    elif spec.is_homogeneous:
        out = a ** spec.alpha
    elif spec.kind == SymbolKind.ZERO:
        out = np.zeros_like(a)
    else:
        table_xi = np.asarray(spec.table_xi)
        lo, hi = table_xi[0], table_xi[-1]
        if np.any(arr < lo) or np.any(arr > hi):
            bad = arr[(arr < lo) | (arr > hi)][0]
            raise SymbolRangeError(
                f"custom symbol evaluated at xi={bad:g}, outside its table [{lo:g}, {hi:g}]"
            )
        out = np.interp(arr, table_xi, np.asarray(spec.table_m))

    if scalar:
        return float(out[0])
    return out


# ============================================================================
# Structural checks
# ============================================================================

def check_symbol_conditions(spec: SymbolSpec, xi_max: float = 1e3,
                            n_samples: int = 256) -> ConditionReport:
    """
    Check evenness, the growth exponent and the tail Lipschitz condition.

    Samples are log-spaced on [N, xi_max]. The tail constant is the largest
    ratio |m(xi + y) - m(xi)| / (|y| |xi|^(gamma - 1)) over the samples and
    the sampled offsets y; it is reported as violated when non-finite or
    when the ratio keeps growing with xi.
    """
    N = spec.tail_threshold_N
    if not xi_max > N:
        raise ConfigurationError(f"xi_max={xi_max} must exceed the tail threshold N={N}")
    if n_samples < 16:
        raise ConfigurationError(f"need at least 16 samples, got {n_samples}")

    sym = np.linspace(-xi_max, xi_max, 2 * n_samples + 1)
    evenness_defect = float(np.max(np.abs(eval_symbol(spec, sym) - eval_symbol(spec, -sym))))

    xi = np.geomspace(N, xi_max, n_samples)
    m = eval_symbol(spec, xi)
    usable = np.isfinite(m) & (np.abs(m) > 0)
    n_usable = int(np.count_nonzero(usable))
    if n_usable < 2:
        raise InsufficientDataError(
            f"only {n_usable} usable tail samples on [{N:g}, {xi_max:g}]"
        )
    if n_usable >= 3:
        fitted, halfwidth = fit_loglog_slope(list(zip(xi[usable], np.abs(m[usable]))))
    else:
        fitted = float(np.diff(np.log(np.abs(m[usable])))[0] / np.diff(np.log(xi[usable]))[0])
        halfwidth = 0.0

    gamma = spec.gamma if spec.gamma is not None else max(fitted, 0.0)

    ratios = np.zeros(n_samples - 1)
    spacing = np.diff(xi)
    base = xi[:-1]
    m_base = m[:-1]
    for frac in TAIL_PROBE_FRACTIONS:
        for sign in (1.0, -1.0):
            y = sign * frac * spacing
            dm = np.abs(eval_symbol(spec, base + y) - m_base)
            ratio = dm / (np.abs(y) * base ** (gamma - 1.0))
            ratios = np.maximum(ratios, ratio)

    tail_constant = float(np.max(ratios))
    status = "finite"
    if not np.isfinite(tail_constant):
        status = "violated"
    else:
        positive = ratios > 0
        if np.count_nonzero(positive) >= 3:
            growth, _ = fit_loglog_slope(list(zip(base[positive], ratios[positive])))
            if growth > TAIL_GROWTH_TOLERANCE:
                status = "violated"

    flags = []
    if gamma >= 2.0 or fitted >= 2.0 - 0.01:
        flags.append(f"gamma={gamma:g} outside the line non-uniformity range (gamma < 2)")
    if fitted > spec.growth_exponent_p + EXPONENT_TOLERANCE:
        flags.append(
            f"fitted growth {fitted:.4f} exceeds declared p={spec.growth_exponent_p:g}"
        )
    if spec.lower_exponent_r is not None and fitted < spec.lower_exponent_r - EXPONENT_TOLERANCE:
        flags.append(
            f"fitted growth {fitted:.4f} below declared lower exponent r={spec.lower_exponent_r:g}"
        )
    if status == "violated":
        flags.append("tail Lipschitz condition violated")
    for flag in flags:
        logger.info("%s: %s", symbol_name(spec), flag)

    return ConditionReport(
        symbol=symbol_name(spec),
        xi_max=float(xi_max),
        n_samples=int(n_samples),
        n_tail_samples=n_usable,
        evenness_defect=evenness_defect,
        fitted_exponent=float(fitted),
        fit_halfwidth=float(halfwidth),
        declared_p=spec.growth_exponent_p,
        declared_gamma=spec.gamma,
        declared_r=spec.lower_exponent_r,
        gamma_used=float(gamma),
        tail_constant=tail_constant if status == "finite" else None,
        tail_status=status,
        flags=flags,
    )


def nonuniformity_regimes(spec: SymbolSpec, s: float) -> list[str]:
    """
    Regimes in which the flow map is known to fail uniform continuity.

    "periodic" and "line" need s > 3/2 (the latter with gamma < 2);
    "periodic-lowreg" covers 0 < s <= 3/2 when the flow exists;
    "line-lowreg" needs a lower growth exponent 1/2 < r < 2 and s < r/2.
    """
    regimes = []
    if s > 1.5:
        regimes.append("periodic")
    elif s > 0:
        regimes.append("periodic-lowreg")
    gamma_ok = spec.gamma is not None and spec.gamma < 2.0
    if gamma_ok and s > 1.5:
        regimes.append("line")
    r = spec.lower_exponent_r
    if gamma_ok and r is not None and 0.5 < r < 2.0 and 0 < s < r / 2.0:
        regimes.append("line-lowreg")
    return regimes
