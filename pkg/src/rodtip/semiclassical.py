"""Short-time propagator of the inverted oscillator and the tipping time it predicts.

Near the upright position the rod's potential is ``mga (1 - theta^2/2)``, so
the Lagrangian is that of a harmonic oscillator with imaginary frequency.
Only the direct (monotonic) classical path is kept; reflections from the
floor are ignored, which is accurate while the validity ratio
``2 hbar sinh(Omega t) / (M a^2 Omega)`` stays small.

Everything here is a closed-form expression except :func:`density_peak_time`
(a numerical maximisation) and :func:`apply_propagator` (a quadrature). Both
exist to check the closed forms.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq
from scipy.signal import czt

from .core import GaussianState, Regime, RodParameters, classical_regime, derive
from .errors import (
    DomainError,
    NoInteriorMaximumError,
    PropagatorValidityError,
    RegimeWarning,
    SemiclassicalValidityWarning,
)
from .grid import AngularGrid, WaveFunction
from .search import golden_section_max, log_scan

VALIDITY_THRESHOLD = 0.1
VALIDITY_HARD_LIMIT = 1.0
LINEARIZED_ARGUMENT = 0.3

_COMPLEX_STEP = 1e-30
_CZT_BLOCK = 2048


@dataclass(frozen=True)
class PropagatorValidity:
    t: float
    ratio: float
    is_valid: bool


@dataclass(frozen=True)
class TippingReport:
    sigma: float
    t_tip_exact: float
    t_tip_quantum_approx: float
    t_tip_linearized: float
    validity: PropagatorValidity
    regime: Regime
    de_broglie_ratio: float
    asinh_argument: float

    def to_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "t_tip_exact": self.t_tip_exact,
            "t_tip_quantum_approx": self.t_tip_quantum_approx,
            "t_tip_linearized": self.t_tip_linearized,
            "validity_ratio": self.validity.ratio,
            "validity_ok": self.validity.is_valid,
            "regime": self.regime.value,
            "de_broglie_ratio": self.de_broglie_ratio,
            "asinh_argument": self.asinh_argument,
        }


def _sigma(state) -> float:
    if isinstance(state, GaussianState):
        return state.sigma
    return GaussianState(float(state)).sigma


def validity_ratio(params: RodParameters, t):
    d = derive(params)
    return 2.0 * params.hbar * np.sinh(d.Omega * np.asarray(t, dtype=float)) / d.stiffness


def validity(params: RodParameters, t: float, threshold: float = VALIDITY_THRESHOLD) -> PropagatorValidity:
    ratio = float(validity_ratio(params, t))
    return PropagatorValidity(t=float(t), ratio=ratio, is_valid=ratio < threshold)


def validity_time_limit(params: RodParameters, ratio: float = VALIDITY_HARD_LIMIT) -> float:
    """Time at which the validity ratio reaches ``ratio``."""
    d = derive(params)
    return math.asinh(ratio * d.stiffness / (2.0 * params.hbar)) / d.Omega


def _check_validity(params, t, threshold):
    v = validity(params, t, threshold)
    if v.ratio >= VALIDITY_HARD_LIMIT:
        raise PropagatorValidityError(v.t, v.ratio, VALIDITY_HARD_LIMIT)
    if not v.is_valid:
        warnings.warn(
            f"validity ratio {v.ratio:.3g} at t={v.t:.6g} exceeds {threshold:g}; "
            "the single-path propagator is becoming inaccurate",
            SemiclassicalValidityWarning, stacklevel=3,
        )
    return v


def _positive_time(t, what):
    if not np.all(np.asarray(t) > 0):
        raise DomainError(f"{what} needs t > 0 (t = 0 is a degenerate boundary-value problem)")


def alpha(params: RodParameters, t):
    """M a^2 Omega / (2 hbar sinh(Omega t)), in rad^-2."""
    _positive_time(t, "alpha")
    d = derive(params)
    return d.stiffness / (2.0 * params.hbar * np.sinh(d.Omega * np.asarray(t, dtype=float)))


def time_for_alpha(params: RodParameters, alpha_value: float) -> float:
    d = derive(params)
    return math.asinh(d.stiffness / (2.0 * params.hbar * alpha_value)) / d.Omega


def classical_trajectory(params: RodParameters, theta1, theta2, t: float, tau):
    """Monotonic solution of theta'' = Omega^2 theta with theta(0)=theta1, theta(t)=theta2."""
    _positive_time(t, "classical_trajectory")
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0) or np.any(tau > t):
        raise DomainError("tau must lie in [0, t]")
    W = derive(params).Omega
    c1 = (theta2 - theta1 * math.cosh(W * t)) / math.sinh(W * t)
    return c1 * np.sinh(W * tau) + theta1 * np.cosh(W * tau)


def classical_action(params: RodParameters, theta1, theta2, t):
    _positive_time(t, "classical_action")
    d = derive(params)
    wt = d.Omega * np.asarray(t, dtype=float)
    theta1 = np.asarray(theta1, dtype=float)
    theta2 = np.asarray(theta2, dtype=float)
    return d.stiffness / (2.0 * np.sinh(wt)) * (
        (theta1 ** 2 + theta2 ** 2) * np.cosh(wt) - 2.0 * theta1 * theta2
    )


def propagator_prefactor(params: RodParameters, t):
    """G(0,t;0,0) on the principal branch: sqrt(M a^2 Omega / (2 pi hbar sinh)) e^{-i pi/4}."""
    d = derive(params)
    mod2 = d.stiffness / (2.0 * math.pi * params.hbar * np.sinh(d.Omega * np.asarray(t, dtype=float)))
    return np.sqrt(mod2) * np.exp(-0.25j * math.pi)


def propagator(params: RodParameters, theta1, theta2, t: float,
               threshold: float = VALIDITY_THRESHOLD):
    """Amplitude to go from theta1 at time 0 to theta2 at time t."""
    _positive_time(t, "propagator")
    _check_validity(params, t, threshold)
    phase = classical_action(params, theta1, theta2, t) / params.hbar
    return propagator_prefactor(params, t) * np.exp(1j * phase)


def unitarity_kernel(params: RodParameters, theta, t: float):
    """|G(0,t;0,0)|^2 exp(-i alpha theta^2 cosh) sin(alpha pi theta/2) / (alpha theta).

    This is the conventional closed form for the overlap integral over theta'
    of G*(theta,t;theta',0) G(theta',t;0,0) on [-pi/2, pi/2]. Direct quadrature
    of that product gives sin(alpha pi theta)/(alpha theta) instead (the cross
    term in the phase is 2 alpha theta theta'); both carry unit weight and tend
    to delta(theta) as alpha -> infinity, which is all the validity argument
    uses. The theta -> 0 limit (pi/2) is handled through ``np.sinc``.
    """
    _positive_time(t, "unitarity_kernel")
    a = alpha(params, t)
    c = math.cosh(derive(params).Omega * t)
    theta = np.asarray(theta, dtype=float)
    g0_sq = a / math.pi
    return g0_sq * np.exp(-1j * a * theta ** 2 * c) * (0.5 * math.pi) * np.sinc(0.5 * a * theta)


def _is_uniform(x):
    if x.size < 3:
        return x.size == 2
    dx = np.diff(x)
    return np.allclose(dx, dx[0], rtol=1e-12, atol=0.0) and dx[0] > 0


def apply_propagator(params: RodParameters, initial, theta_out, t: float,
                     support=(-math.pi / 2, math.pi / 2), oversample: float = 2.0,
                     threshold: float = VALIDITY_THRESHOLD, chunk: int = 1 << 20):
    """Propagate ``initial`` to time ``t`` by direct quadrature of the kernel.

    ``initial`` is a callable of theta or a :class:`WaveFunction` (cubic-spline
    interpolated). The trapezoid rule runs over ``support`` with enough nodes
    to sample the kernel's chirp ``oversample`` times above Nyquist. Uniform
    output points use a chirp-z transform; anything else is summed directly.
    """
    _positive_time(t, "apply_propagator")
    _check_validity(params, t, threshold)
    if isinstance(initial, WaveFunction):
        x_nodes = np.concatenate(([-math.pi / 2], initial.theta, [math.pi / 2]))
        amps = np.concatenate(([0.0], initial.amplitudes, [0.0]))
        re = CubicSpline(x_nodes, amps.real)
        im = CubicSpline(x_nodes, amps.imag)
        f = lambda x: re(x) + 1j * im(x)  # noqa: E731
    else:
        f = initial

    theta_out = np.atleast_1d(np.asarray(theta_out, dtype=float))
    lo, hi = float(support[0]), float(support[1])
    a = float(alpha(params, t))
    c = math.cosh(derive(params).Omega * t)
    max_grad = 2.0 * a * (c * max(abs(lo), abs(hi)) + np.max(np.abs(theta_out)))
    n = max(2049, int(math.ceil(oversample * (hi - lo) * max_grad / math.pi)) + 1)
    x = np.linspace(lo, hi, n)
    h = (hi - lo) / (n - 1)
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    g = w * np.asarray(f(x), dtype=complex) * np.exp(1j * a * c * x ** 2)

    if _is_uniform(theta_out):
        # blocked chirp-z: the Bluestein chirp phase grows like (block length)^2,
        # so short blocks keep its rounding error near machine precision
        d = theta_out[1] - theta_out[0]
        nb = -(-n // _CZT_BLOCK)
        blocks = np.zeros(nb * _CZT_BLOCK, dtype=complex)
        blocks[:n] = g
        blocks = blocks.reshape(nb, _CZT_BLOCK)
        partial = czt(blocks, m=theta_out.size, w=np.exp(-2j * a * d * h),
                      a=np.exp(2j * a * theta_out[0] * h), axis=-1)
        starts = x[0] + h * _CZT_BLOCK * np.arange(nb)
        sums = np.einsum("bk,bk->k", partial, np.exp(-2j * a * starts[:, None] * theta_out[None, :]))
    else:
        sums = np.empty(theta_out.size, dtype=complex)
        step = max(1, chunk // n)
        for i in range(0, theta_out.size, step):
            th = theta_out[i:i + step, None]
            sums[i:i + step] = np.exp(-2j * a * th * x[None, :]) @ g
    return propagator_prefactor(params, t) * np.exp(1j * a * c * theta_out ** 2) * sums


def evolve_analytic(params: RodParameters, state: GaussianState, t: float,
                    grid: AngularGrid | None = None, theta=None,
                    threshold: float = VALIDITY_THRESHOLD) -> WaveFunction | np.ndarray:
    """Closed-form Gaussian evolved by the short-time propagator.

    The initial normalisation uses erf(pi/(2 sigma)) ~ 1 and the theta'
    integral is extended to the whole line. The two large phases of the
    textbook form, exp(i alpha c theta^2) and the imaginary part of the
    Gaussian exponent, cancel to leading order as t -> 0; they are combined
    algebraically here (multiplying through by sinh(Omega t)) so that t = 0
    and tiny t evaluate without cancellation.

    Returns a :class:`WaveFunction` when ``grid`` is given, else an array on ``theta``.
    """
    if t < 0:
        raise DomainError("evolve_analytic needs t >= 0")
    sigma = _sigma(state)
    if t > 0:
        _check_validity(params, t, threshold)
    d = derive(params)
    beta = d.stiffness / (2.0 * params.hbar)  # alpha * sinh(Omega t)
    s = math.sinh(d.Omega * t)
    c = math.cosh(d.Omega * t)
    x = grid.nodes if grid is not None else np.asarray(theta, dtype=float)

    norm0 = (math.sqrt(math.pi) * sigma) ** -0.5
    pref = norm0 * np.exp(-0.25j * math.pi) * math.sqrt(beta) / np.sqrt(s / (2 * sigma ** 2) - 1j * beta * c)
    den = s ** 2 + 4.0 * beta ** 2 * c ** 2 * sigma ** 4
    expo = (-2.0 * beta ** 2 * sigma ** 2 * x ** 2
            + 1j * beta * s * c * (1.0 + 4.0 * beta ** 2 * sigma ** 4) * x ** 2) / den
    psi = pref * np.exp(expo)
    if grid is not None:
        return WaveFunction(grid, psi, t=float(t), meta={"engine": "analytic"})
    return psi


def _density_terms(params, sigma, t):
    d = derive(params)
    amp = d.stiffness * sigma ** 2  # M a^2 Omega sigma^2, same units as hbar
    wt = d.Omega * t
    D = (amp * np.cosh(wt)) ** 2 + (params.hbar * np.sinh(wt)) ** 2
    return amp, D


def density_analytic(params: RodParameters, state, theta, t):
    """Probability density P(theta, t) of the evolved Gaussian; valid at t = 0."""
    sigma = _sigma(state)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("density_analytic needs t >= 0")
    amp, D = _density_terms(params, sigma, t)
    theta = np.asarray(theta, dtype=float)
    return amp / (sigma * np.sqrt(math.pi * D)) * np.exp(-(amp * theta / sigma) ** 2 / D)


def log_density_analytic(params: RodParameters, state, theta, t):
    """Natural log of :func:`density_analytic`; accepts complex ``t`` for complex-step derivatives."""
    sigma = _sigma(state)
    amp, D = _density_terms(params, sigma, t)
    return math.log(amp / sigma) - 0.5 * np.log(math.pi * D) - (amp * theta / sigma) ** 2 / D


def density_peak_time(params: RodParameters, state, theta: float,
                      rtol: float = 1e-10, num_scan: int = 256) -> float:
    """Time at which P(theta, t) is largest, found numerically.

    A log-spaced scan over [1e-6/Omega, t(ratio=1)] brackets the maximum,
    golden-section search narrows it, and a Brent root-find on the
    complex-step derivative of log P polishes the result below the
    sqrt(machine epsilon) floor that any comparison-based search hits on a
    flat maximum.
    """
    if theta == 0:
        raise NoInteriorMaximumError("P(0, t) decreases monotonically; it has no interior maximum")
    sigma = _sigma(state)
    d = derive(params)
    lo = 1e-6 / d.Omega
    hi = validity_time_limit(params, VALIDITY_HARD_LIMIT)
    if not hi > lo:
        raise NoInteriorMaximumError("validity window is empty for these parameters")

    f = lambda t: float(log_density_analytic(params, sigma, theta, t))  # noqa: E731
    ts, vals = log_scan(f, lo, hi, num_scan)
    k = int(np.argmax(vals))
    if k == 0:
        raise NoInteriorMaximumError(
            f"P({theta:g}, t) is largest at t -> 0; |theta| must exceed sigma/sqrt(2) = {sigma / math.sqrt(2):.6g}"
        )
    if k == num_scan - 1:
        raise NoInteriorMaximumError(f"P({theta:g}, t) still rising at the edge of the validity window")

    a, b = golden_section_max(f, ts[k - 1], ts[k + 1], rtol=rtol)

    def slope(t):
        return float(np.imag(log_density_analytic(params, sigma, theta, t + 1j * _COMPLEX_STEP))) / _COMPLEX_STEP

    width = b - a
    for lo_b, hi_b in ((max(ts[k - 1], a - 10 * width), min(ts[k + 1], b + 10 * width)), (ts[k - 1], ts[k + 1])):
        s_lo, s_hi = slope(lo_b), slope(hi_b)
        if s_lo > 0 > s_hi:
            return brentq(slope, lo_b, hi_b, xtol=1e-300, rtol=max(rtol * 1e-3, 4 * np.finfo(float).eps), maxiter=200)
        if s_lo == 0.0:
            return lo_b
        if s_hi == 0.0:
            return hi_b
    return 0.5 * (a + b)


def tipping_time_exact(params: RodParameters, sigma) -> float:
    """Time for the density maximum to reach theta = sigma."""
    sigma = _sigma(sigma)
    d = derive(params)
    amp = d.stiffness * sigma ** 2
    return math.asinh(amp / math.hypot(params.hbar, amp)) / d.Omega


def tipping_time_original_variables(params: RodParameters, sigma) -> float:
    """Same quantity as :func:`tipping_time_exact`, written with m, kappa and omega."""
    sigma = _sigma(sigma)
    d = derive(params)
    m, a, hbar = params.mass, params.half_length, params.hbar
    sk = math.sqrt(d.kappa)
    num = sk * m * a ** 2 * d.omega * sigma ** 2
    return sk / d.omega * math.asinh(num / math.sqrt(hbar ** 2 + d.kappa * (m * a ** 2 * d.omega * sigma ** 2) ** 2))


def asinh_argument(params: RodParameters, sigma) -> float:
    """sqrt(kappa) m a^2 omega sigma^2 / hbar, the argument of the quantum-regime formula."""
    sigma = _sigma(sigma)
    d = derive(params)
    return d.stiffness * sigma ** 2 / params.hbar


def _quantum_approx(params, sigma):
    d = derive(params)
    return math.sqrt(d.kappa) / d.omega * math.asinh(asinh_argument(params, sigma))


def tipping_time_quantum_approx(params: RodParameters, sigma) -> float:
    """Tipping time with the sigma^4 term under the square root dropped.

    Accurate when the de Broglie ratio is large; warns otherwise.
    """
    sigma = _sigma(sigma)
    regime = classical_regime(params)
    if regime is not Regime.QUANTUM:
        warnings.warn(
            f"quantum-regime tipping time evaluated in the {regime.value} regime",
            RegimeWarning, stacklevel=2,
        )
    return _quantum_approx(params, sigma)


def tipping_time_linearized(params: RodParameters, sigma) -> float:
    sigma = _sigma(sigma)
    return derive(params).moment_of_inertia * sigma ** 2 / params.hbar


def uncertainty_product(params: RodParameters, sigma, tip: str = "linearized") -> float:
    """Delta theta * Delta l with Delta theta = sigma and Delta l = I sigma / t_tip.

    ``tip`` selects which tipping time supplies t_tip: ``"linearized"`` or ``"exact"``.
    """
    sigma = _sigma(sigma)
    arg = asinh_argument(params, sigma)
    if arg >= LINEARIZED_ARGUMENT:
        warnings.warn(
            f"asinh argument {arg:.3g} >= {LINEARIZED_ARGUMENT}; sinh(x) ~ x no longer holds",
            RegimeWarning, stacklevel=2,
        )
    if tip == "linearized":
        t_tip = tipping_time_linearized(params, sigma)
    elif tip == "exact":
        t_tip = tipping_time_exact(params, sigma)
    else:
        raise ValueError(f"tip must be 'linearized' or 'exact', got {tip!r}")
    inertia = derive(params).moment_of_inertia
    return sigma * (inertia * sigma / t_tip)


def tipping_report(params: RodParameters, sigma, threshold: float = VALIDITY_THRESHOLD) -> TippingReport:
    sigma = _sigma(sigma)
    t_exact = tipping_time_exact(params, sigma)
    d = derive(params)
    return TippingReport(
        sigma=sigma,
        t_tip_exact=t_exact,
        t_tip_quantum_approx=_quantum_approx(params, sigma),
        t_tip_linearized=tipping_time_linearized(params, sigma),
        validity=validity(params, t_exact, threshold),
        regime=classical_regime(d),
        de_broglie_ratio=d.de_broglie_ratio,
        asinh_argument=asinh_argument(params, sigma),
    )
