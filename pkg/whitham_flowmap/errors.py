"""
Exception hierarchy for the flow-map toolkit.

Configuration problems subclass ValueError so callers that catch the
builtin keep working; solver breakdowns carry the time they happened at.
"""

from typing import Optional


class WhithamFlowmapError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(WhithamFlowmapError, ValueError):
    """Invalid grid, parameters, resolution or file layout."""


class SymbolRangeError(ConfigurationError):
    """A tabulated symbol was evaluated outside its table."""


class InsufficientDataError(WhithamFlowmapError, ValueError):
    """Too few usable samples for a fit."""


class UnsupportedFamilyError(WhithamFlowmapError, TypeError):
    """A field family cannot provide what was asked of it."""


class FitFailure(WhithamFlowmapError):
    """A bound could not be satisfied by any admissible constant."""


class NumericalBlowupError(WhithamFlowmapError, ArithmeticError):
    """
    The integrator produced non-finite values or crossed the slope threshold.

    `diagnostics` holds the partial trajectory when the error was raised
    from evolve(), and `field` the last finite state.
    """

    def __init__(self, message: str, time: float, diagnostics=None, field=None):
        super().__init__(message)
        self.time = time
        self.diagnostics = diagnostics
        self.field = field


class StepSizeUnderflowError(NumericalBlowupError):
    """The step-size policy asked for a step below the configured minimum."""

    def __init__(self, message: str, time: float, dt: Optional[float] = None,
                 diagnostics=None, field=None):
        super().__init__(message, time, diagnostics, field)
        self.dt = dt
