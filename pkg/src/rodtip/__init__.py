"""Tipping time of a quantum rod balanced on its end.

The closed-form results come from the short-time (single classical path)
propagator of the inverted oscillator; :mod:`rodtip.oracle` re-derives them
by integrating the Schrodinger equation on a grid with the full cosine
potential.
"""
from .core import (
    HBAR_CODATA,
    DerivedParameters,
    GaussianState,
    Regime,
    RodParameters,
    classical_regime,
    derive,
    natural_units,
)
from .errors import (
    ConfigError,
    DomainError,
    NoInteriorMaximumError,
    ParameterError,
    PropagatorValidityError,
    RegimeWarning,
    RodTipError,
    SemiclassicalValidityWarning,
    SolverError,
)
from .grid import AngularGrid, WaveFunction
from .semiclassical import (
    TippingReport,
    density_analytic,
    density_peak_time,
    evolve_analytic,
    propagator,
    tipping_report,
    tipping_time_exact,
    tipping_time_linearized,
    tipping_time_quantum_approx,
    uncertainty_product,
)

__version__ = "0.1.0"
