"""Physical parameters of the pivoted rod and the initial Gaussian state.

All quantities are SI unless the parameters were built with
:func:`natural_units`, where ``m = a = g = 1`` and only hbar is free.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .errors import DomainError, ParameterError, RegimeWarning

HBAR_CODATA = 1.054571817e-34  # J s
STANDARD_GRAVITY = 9.80665  # m / s^2
KAPPA = 4.0 / 3.0  # I / (m a^2) for a uniform rod pivoted at one end

QUANTUM_THRESHOLD = 1.0
CLASSICAL_THRESHOLD = 0.01
SIGMA_WARN = 0.3


class Regime(str, enum.Enum):
    QUANTUM = "quantum"
    INTERMEDIATE = "intermediate"
    CLASSICAL = "classical"


@dataclass(frozen=True)
class RodParameters:
    """Mass, pivot-to-centre distance, gravity and hbar.

    ``half_length`` is the distance from the pivot to the centre of mass.
    """

    mass: float
    half_length: float
    gravity: float = STANDARD_GRAVITY
    hbar: float = HBAR_CODATA

    def __post_init__(self):
        _check_positive(self)

    @property
    def derived(self) -> DerivedParameters:
        return derive(self)

    def replace(self, **changes) -> RodParameters:
        fields = dict(mass=self.mass, half_length=self.half_length,
                      gravity=self.gravity, hbar=self.hbar)
        fields.update(changes)
        return RodParameters(**fields)


def _check_positive(params):
    for name in ("mass", "half_length", "gravity", "hbar"):
        value = getattr(params, name)
        if isinstance(value, bool) or not isinstance(value, (int, float, np.floating)) \
                or not math.isfinite(value):
            raise ParameterError(name, f"must be a finite number, got {value!r}")
        if value <= 0:
            raise ParameterError(name, f"must be positive, got {value!r}")


def natural_units(hbar: float = 0.01) -> RodParameters:
    """Rod with m = a = g = 1; hbar is then the de Broglie ratio."""
    return RodParameters(mass=1.0, half_length=1.0, gravity=1.0, hbar=hbar)


@dataclass(frozen=True)
class DerivedParameters:
    moment_of_inertia: float
    kappa: float
    omega: float
    effective_mass: float
    Omega: float
    de_broglie_ratio: float
    # M a^2 Omega, the combination that sets every semiclassical scale
    stiffness: float


def derive(params: RodParameters) -> DerivedParameters:
    """Compute I, kappa, omega, M, Omega and the de Broglie ratio."""
    _check_positive(params)
    m, a, g, hbar = params.mass, params.half_length, params.gravity, params.hbar
    inertia = KAPPA * m * a * a
    omega = math.sqrt(g / a)
    eff_mass = inertia / (a * a)
    # sqrt(m/M) = sqrt(3)/2 exactly; written this way so 1/Omega == sqrt(kappa)/omega
    Omega = omega / math.sqrt(KAPPA)
    return DerivedParameters(
        moment_of_inertia=inertia,
        kappa=KAPPA,
        omega=omega,
        effective_mass=eff_mass,
        Omega=Omega,
        de_broglie_ratio=hbar / (m * a * a * omega),
        stiffness=eff_mass * a * a * Omega,
    )


def classical_regime(params: RodParameters | DerivedParameters) -> Regime:
    ratio = params.de_broglie_ratio if isinstance(params, DerivedParameters) \
        else derive(params).de_broglie_ratio
    if ratio > QUANTUM_THRESHOLD:
        return Regime.QUANTUM
    if ratio < CLASSICAL_THRESHOLD:
        return Regime.CLASSICAL
    return Regime.INTERMEDIATE


@dataclass(frozen=True)
class GaussianState:
    """Real Gaussian of width ``sigma`` centred on the upright position.

    The amplitude is normalised on [-pi/2, pi/2] with the exact
    ``erf(pi / (2 sigma))`` factor and vanishes outside that interval.
    """

    sigma: float

    def __post_init__(self):
        s = self.sigma
        if not isinstance(s, (int, float, np.floating)) or not math.isfinite(s):
            raise DomainError(f"sigma must be a finite number, got {s!r}")
        if not 0.0 < s < math.pi / 2:
            raise DomainError(f"sigma must lie in (0, pi/2), got {s!r}")
        if s > SIGMA_WARN:
            warnings.warn(
                f"sigma={s:g} exceeds {SIGMA_WARN}; the small-angle treatment assumes sigma << 1",
                RegimeWarning, stacklevel=2,
            )

    @property
    def normalization(self) -> float:
        s = self.sigma
        return 1.0 / math.sqrt(math.sqrt(math.pi) * s * erf(math.pi / (2 * s)))

    def amplitude(self, theta):
        theta = np.asarray(theta, dtype=float)
        inside = np.abs(theta) <= math.pi / 2
        psi = self.normalization * np.exp(-theta ** 2 / (2 * self.sigma ** 2))
        return np.where(inside, psi, 0.0)

    def density(self, theta):
        return self.amplitude(theta) ** 2
