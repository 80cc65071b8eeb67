"""
Discrete Fourier analysis on a periodic grid.

Coefficients follow the normalization of `Field.spectrum`: c = rfft(values) / N,
so f(x_j) = sum_k c_k exp(i kappa_k x_j) and Parseval reads
integral |f|^2 = L * sum_k w_k |c_k|^2 with the weights of
`PeriodicGrid.parseval_weights`.
"""

import logging
from typing import Callable

import numpy as np

from .errors import ConfigurationError
from .models import Field, PeriodicGrid, SymbolSpec
from .symbols import eval_symbol

logger = logging.getLogger(__name__)


def make_grid(length: float, n_modes: int) -> PeriodicGrid:
    """Uniform grid on the torus of circumference `length`."""
    return PeriodicGrid(float(length), int(n_modes))


def field_from_values(grid: PeriodicGrid, values) -> Field:
    return Field(grid, np.asarray(values, dtype=float))


def field_from_function(grid: PeriodicGrid, f: Callable[[np.ndarray], np.ndarray]) -> Field:
    """Sample a vectorized callable at the collocation points."""
    return Field(grid, np.asarray(f(grid.x), dtype=float))


def zero_field(grid: PeriodicGrid) -> Field:
    return Field(grid, np.zeros(grid.n_modes))


def constant_field(grid: PeriodicGrid, value: float) -> Field:
    return Field(grid, np.full(grid.n_modes, float(value)))


# ============================================================================
# Multipliers
# ============================================================================

def symbol_table(grid: PeriodicGrid, spec: SymbolSpec) -> np.ndarray:
    """m(kappa_k) for the rfft wavenumbers of `grid`."""
    return eval_symbol(spec, grid.rwavenumbers)


def apply_multiplier(f: Field, spec: SymbolSpec) -> Field:
    """L f, i.e. the spectrum multiplied by m(kappa). Even symbols keep the Nyquist mode."""
    return Field.from_spectrum(f.grid, f.spectrum * symbol_table(f.grid, spec))


def odd_wavenumbers(grid: PeriodicGrid) -> np.ndarray:
    """rfft wavenumbers with the unpaired Nyquist entry zeroed."""
    k = grid.rwavenumbers.copy()
    k[-1] = 0.0
    return k


def derivative(f: Field) -> Field:
    """d/dx by multiplication with i kappa; the Nyquist mode is dropped."""
    return Field.from_spectrum(f.grid, 1j * odd_wavenumbers(f.grid) * f.spectrum)


def bessel_potential(f: Field, s: float) -> Field:
    """Lambda^s f: spectrum multiplied by (1 + kappa^2)^(s/2)."""
    weight = (1.0 + f.grid.rwavenumbers ** 2) ** (0.5 * s)
    return Field.from_spectrum(f.grid, f.spectrum * weight)


def sobolev_norm(f: Field, s: float) -> float:
    """
    ||f||_{H^s} = sqrt(L * sum_k (1 + kappa_k^2)^s |c_k|^2).

    Exact on resolved trigonometric polynomials. The same weight L is used
    on long tori standing in for the line.
    """
    return sobolev_norm_of_spectrum(f.grid, f.spectrum, s)


def sobolev_norm_of_spectrum(grid: PeriodicGrid, coeffs: np.ndarray, s: float) -> float:
    weight = grid.parseval_weights * (1.0 + grid.rwavenumbers ** 2) ** s
    return float(np.sqrt(grid.length * np.sum(weight * np.abs(coeffs) ** 2)))


# ============================================================================
# Products and quadrature
# ============================================================================

def pad_spectrum(coeffs: np.ndarray, n_source: int, n_target: int) -> np.ndarray:
    """
    Copy rfft coefficients onto a finer grid of `n_target` points.

    The source Nyquist coefficient stands for a cosine, so on the finer grid
    it is split evenly between the +N/2 and -N/2 modes.
    """
    if n_target < n_source:
        raise ConfigurationError(
            f"cannot pad {n_source} modes onto a {n_target}-point grid"
        )
    half = n_source // 2
    padded = np.zeros(n_target // 2 + 1, dtype=complex)
    padded[:half] = coeffs[:half]
    if n_target > n_source:
        padded[half] = 0.5 * coeffs[half]
    else:
        padded[half] = coeffs[half]
    return padded


def dealiased_product_coeffs(a: np.ndarray, b: np.ndarray, n_modes: int) -> np.ndarray:
    """
    Coefficients of the product of two fields given by their coefficients.

    Products are formed on a 3/2-padded grid and truncated back; the
    Nyquist coefficient of the result is zero.
    """
    m = 3 * n_modes // 2
    ua = np.fft.irfft(pad_spectrum(a, n_modes, m) * m, n=m)
    ub = ua if b is a else np.fft.irfft(pad_spectrum(b, n_modes, m) * m, n=m)
    full = np.fft.rfft(ua * ub) / m
    out = full[: n_modes // 2 + 1].copy()
    out[-1] = 0.0
    return out


def dealiased_product(f: Field, g: Field) -> Field:
    """Pointwise product without aliasing onto the retained modes."""
    if f.grid != g.grid:
        raise ConfigurationError(f"grid mismatch: {f.grid} vs {g.grid}")
    coeffs = dealiased_product_coeffs(f.spectrum, g.spectrum, f.grid.n_modes)
    return Field.from_spectrum(f.grid, coeffs)


def integral(f: Field) -> float:
    """Trapezoid quadrature of f over the torus (L times the mean coefficient)."""
    return float(f.grid.length * f.spectrum[0].real)


def inner_product(f: Field, g: Field) -> float:
    """Trapezoid quadrature of f g over the torus."""
    if f.grid != g.grid:
        raise ConfigurationError(f"grid mismatch: {f.grid} vs {g.grid}")
    return float(f.grid.length / f.grid.n_modes * np.dot(f.values, g.values))


def cubic_integral(f: Field) -> float:
    """
    Integral of f^3 over the torus, exact for the band-limited field.

    The cube is sampled on a grid of twice the resolution, which resolves
    every mode it contains.
    """
    n = f.grid.n_modes
    fine = np.fft.irfft(pad_spectrum(f.spectrum, n, 2 * n) * (2 * n), n=2 * n)
    return float(f.grid.length / (2 * n) * np.sum(fine ** 3))


def l_infinity(f: Field) -> float:
    return f.max_abs()


# ============================================================================
# Translation and rescaling
# ============================================================================

def shift(f: Field, a: float) -> Field:
    """g(x) = f(x - a), by the phase factor exp(-i kappa a)."""
    phase = np.exp(-1j * f.grid.rwavenumbers * float(a))
    return Field.from_spectrum(f.grid, f.spectrum * phase)


def rescale_field(f: Field, target: PeriodicGrid) -> Field:
    """
    g(x) = f(x / rho) on a torus of length rho * L, with rho = target.length / L.

    Mode k of the source is mode k of the target (its wavenumber shrinks by
    rho), so the map is an exact re-indexing of coefficients.
    """
    if target.n_modes < f.grid.n_modes:
        raise ConfigurationError(
            f"target grid has {target.n_modes} modes, fewer than the source's "
            f"{f.grid.n_modes}"
        )
    coeffs = pad_spectrum(f.spectrum, f.grid.n_modes, target.n_modes)
    return Field.from_spectrum(target, coeffs)
