"""
Whitham flow-map toolkit

Pseudospectral solver and experiment harness for dispersive equations
u_t + u u_x + L(u_x) = 0 with an even Fourier multiplier L (Whitham,
fractional KdV, KdV, Benjamin-Ono or a tabulated symbol). The experiments
exhibit pairs of solutions whose data converge while the solutions stay
apart, on the torus and on the line.
"""

from .errors import (
    WhithamFlowmapError,
    ConfigurationError,
    SymbolRangeError,
    InsufficientDataError,
    UnsupportedFamilyError,
    FitFailure,
    NumericalBlowupError,
    StepSizeUnderflowError,
)
from .models import (
    SymbolKind,
    SymbolSpec,
    PeriodicGrid,
    Field,
    DtPolicy,
    SolverConfig,
    Diagnostics,
    PeriodicFamilyParams,
    LineFamilyParams,
    ConditionReport,
    ExperimentReport,
)
from .symbols import (
    whitham,
    fkdv,
    kdv,
    bo,
    zero,
    custom,
    parse_symbol,
    eval_symbol,
    check_symbol_conditions,
    nonuniformity_regimes,
)
from .spectral import (
    make_grid,
    apply_multiplier,
    derivative,
    sobolev_norm,
    dealiased_product,
    shift,
)
from .solver import (
    step,
    evolve,
    conserved_quantities,
    riccati_bound,
    fit_cs,
)
from .constructions import (
    periodic_approx,
    periodic_error_exact,
    high_freq,
    low_freq_initial,
    rescale_solution,
    residual,
)
from .experiments import (
    fit_loglog_slope,
    run_periodic_nonuniform,
    run_periodic_lowreg,
    run_line_nonuniform,
    verify_norm_lemmas,
    verify_error_decay,
    verify_scaling,
)
from .reports import generate_text_summary
from .serialization import save_experiment_report, load_field

__version__ = "0.1.0"
__all__ = [
    # Errors
    "WhithamFlowmapError",
    "ConfigurationError",
    "SymbolRangeError",
    "InsufficientDataError",
    "UnsupportedFamilyError",
    "FitFailure",
    "NumericalBlowupError",
    "StepSizeUnderflowError",
    # Models
    "SymbolKind",
    "SymbolSpec",
    "PeriodicGrid",
    "Field",
    "DtPolicy",
    "SolverConfig",
    "Diagnostics",
    "PeriodicFamilyParams",
    "LineFamilyParams",
    "ConditionReport",
    "ExperimentReport",
    # Symbols
    "whitham",
    "fkdv",
    "kdv",
    "bo",
    "zero",
    "custom",
    "parse_symbol",
    "eval_symbol",
    "check_symbol_conditions",
    "nonuniformity_regimes",
    # Spectral
    "make_grid",
    "apply_multiplier",
    "derivative",
    "sobolev_norm",
    "dealiased_product",
    "shift",
    # Solver
    "step",
    "evolve",
    "conserved_quantities",
    "riccati_bound",
    "fit_cs",
    # Constructions
    "periodic_approx",
    "periodic_error_exact",
    "high_freq",
    "low_freq_initial",
    "rescale_solution",
    "residual",
    # Experiments
    "fit_loglog_slope",
    "run_periodic_nonuniform",
    "run_periodic_lowreg",
    "run_line_nonuniform",
    "verify_norm_lemmas",
    "verify_error_decay",
    "verify_scaling",
    # Reports and serialization
    "generate_text_summary",
    "save_experiment_report",
    "load_field",
]
