"""Parameter sweeps, scaling fits and the analytic-vs-grid comparison."""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import oracle
from . import semiclassical as sc
from .core import GaussianState, RodParameters, classical_regime, derive
from .errors import DomainError, RodTipError
from .grid import AngularGrid

SWEEP_VARIABLES = ("sigma", "omega", "hbar")
SWEEP_OUTPUTS = (
    "t_tip_exact",
    "t_tip_approx",
    "t_tip_linearized",
    "t_tip_numeric",
    "validity_ratio",
    "uncertainty_product",
    "density_probe",
    "log_density_probe",
)


@dataclass(frozen=True)
class SweepSpec:
    """One-variable sweep around a base parameter set.

    For ``variable="hbar"`` with ``sigma_scaling="sqrt_hbar"`` the width
    follows sigma * sqrt(hbar / params.hbar). ``probe`` is the (theta, t)
    point for the density outputs.
    """

    variable: str
    values: tuple
    params: RodParameters
    sigma: float
    outputs: tuple = ("t_tip_exact", "t_tip_approx", "validity_ratio")
    sigma_scaling: str = "fixed"
    probe: tuple = (0.3, 1.0)
    n_points: int = 1024
    dt: float | None = None
    potential: str = "cosine"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if self.variable not in SWEEP_VARIABLES:
            raise DomainError(f"sweep variable must be one of {SWEEP_VARIABLES}, got {self.variable!r}")
        unknown = [o for o in self.outputs if o not in SWEEP_OUTPUTS]
        if unknown:
            raise DomainError(f"unknown sweep outputs {unknown}; choose from {SWEEP_OUTPUTS}")
        if self.sigma_scaling not in ("fixed", "sqrt_hbar"):
            raise DomainError(f"sigma_scaling must be 'fixed' or 'sqrt_hbar', got {self.sigma_scaling!r}")
        if self.sigma_scaling == "sqrt_hbar" and self.variable != "hbar":
            raise DomainError("sigma_scaling='sqrt_hbar' only applies to hbar sweeps")
        v = np.asarray(self.values)
        if v.size == 0:
            raise DomainError("sweep needs at least one value")
        if v.size > 1:
            dv = np.diff(v)
            if not (np.all(dv > 0) or np.all(dv < 0)):
                raise DomainError("sweep values must be strictly monotone")
        if self.variable == "sigma":
            if np.any(v <= 0) or np.any(v >= math.pi / 2):
                raise DomainError("sigma values must lie in (0, pi/2)")
        elif np.any(v <= 0) or not np.all(np.isfinite(v)):
            raise DomainError(f"{self.variable} values must be positive and finite")

    def point(self, value: float) -> tuple[RodParameters, float]:
        """Parameters and sigma for one sweep value."""
        p, sigma = self.params, self.sigma
        if self.variable == "sigma":
            sigma = value
        elif self.variable == "omega":
            p = p.replace(gravity=value ** 2 * p.half_length)
        else:
            if self.sigma_scaling == "sqrt_hbar":
                sigma = self.sigma * math.sqrt(value / p.hbar)
            p = p.replace(hbar=value)
        return p, sigma


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    prefactor: float
    r_squared: float
    window: tuple
    n_points: int


def fit_power_law(x, y, window=None) -> ScalingFit:
    """Least-squares slope of log y against log x, optionally restricted to ``window``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = np.isfinite(x) & np.isfinite(y) & (x > 0) & (y > 0)
    if window is not None:
        mask &= (x >= window[0]) & (x <= window[1])
    if np.count_nonzero(mask) < 2:
        raise DomainError("power-law fit needs at least two positive points in the window")
    lx, ly = np.log(x[mask]), np.log(y[mask])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    r2 = min(1.0, max(0.0, r2))
    return ScalingFit(
        exponent=float(slope),
        prefactor=float(math.exp(intercept)),
        r_squared=r2,
        window=(float(x[mask].min()), float(x[mask].max())),
        n_points=int(np.count_nonzero(mask)),
    )


def _evaluate_point(spec: SweepSpec, value: float) -> dict:
    row = {spec.variable: value}
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            p, sigma = spec.point(value)
            d = derive(p)
            row.update(sigma=sigma, hbar=p.hbar, omega=d.omega, Omega=d.Omega,
                       de_broglie_ratio=d.de_broglie_ratio, regime=classical_regime(d).value)
            row[spec.variable] = value
            for name in spec.outputs:
                row[name] = _output(spec, name, p, sigma)
        row["warnings"] = "; ".join(sorted({str(w.message) for w in caught}))
        row["error"] = ""
    except RodTipError as exc:
        for name in spec.outputs:
            row.setdefault(name, float("nan"))
        row.setdefault("warnings", "")
        row["error"] = str(exc)
    return row


def _output(spec, name, p, sigma):
    if name == "t_tip_exact":
        return sc.tipping_time_exact(p, sigma)
    if name == "t_tip_approx":
        return sc._quantum_approx(p, sigma)
    if name == "t_tip_linearized":
        return sc.tipping_time_linearized(p, sigma)
    if name == "t_tip_numeric":
        pot = oracle.PotentialSpec(spec.potential, p)
        return oracle.tipping_time_numeric(GaussianState(sigma), AngularGrid(spec.n_points), pot, spec.dt)
    if name == "validity_ratio":
        return sc.validity(p, sc.tipping_time_exact(p, sigma)).ratio
    if name == "uncertainty_product":
        return sc.uncertainty_product(p, sigma, tip="exact")
    theta, t = spec.probe
    if name == "density_probe":
        return float(sc.density_analytic(p, sigma, theta, t))
    return float(sc.log_density_analytic(p, sigma, theta, t))


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[dict]:
    """One record per sweep value, in the order of ``spec.values``.

    Failures at a single point are recorded in that row's ``error`` column.
    """
    if jobs > 1 and len(spec.values) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_evaluate_point, [spec] * len(spec.values), spec.values))
    return [_evaluate_point(spec, v) for v in spec.values]


@dataclass
class DensitySurface:
    """P(theta_i, t_j) on a lattice, with per-curve shape checks."""

    theta: np.ndarray
    t: np.ndarray
    density: np.ndarray
    sigma: float
    peak_index: list
    peak_time: list
    monotone_decreasing: list
    unimodal: list
    peaks_ordered: bool
    checks: dict = field(default_factory=dict)


def _sign_changes(values):
    s = np.sign(np.diff(values))
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def figure1_curves(params: RodParameters, state: GaussianState, theta_list, t_lattice) -> DensitySurface:
    """Density-versus-time curves at fixed angles, with shape annotations.

    A curve at theta = 0 should decrease monotonically. A curve with
    |theta| > sigma/sqrt(2) should rise to one maximum and then decay; closer
    to the axis the maximum sits at t = 0 and the curve only decreases.
    """
    theta = np.asarray(list(theta_list), dtype=float)
    if theta.size == 0:
        raise DomainError("figure1_curves needs at least one angle")
    t = np.asarray(t_lattice, dtype=float)
    dens = sc.density_analytic(params, state, theta[:, None], t[None, :])
    peak_index, peak_time, mono, uni = [], [], [], []
    for th, row in zip(theta, dens):
        k = int(np.argmax(row))
        peak_index.append(k)
        decreasing = bool(np.all(np.diff(row) < 0))
        mono.append(decreasing)
        interior = abs(th) > state.sigma / math.sqrt(2)
        uni.append(bool(interior and _sign_changes(row) == 1 and 0 < k < row.size - 1))
        if th != 0 and interior:
            try:
                peak_time.append(sc.density_peak_time(params, state, th))
            except RodTipError:
                peak_time.append(float("nan"))
        else:
            peak_time.append(float("nan"))
    order = np.argsort(np.abs(theta))
    pts = np.array(peak_time)[order]
    pts = pts[np.isfinite(pts)]
    ordered = bool(np.all(np.diff(pts) > 0))
    checks = {
        "zero_curve_decreasing": all(m for th, m in zip(theta, mono) if th == 0),
        "off_axis_unimodal": all(u for th, u in zip(theta, uni) if abs(th) > state.sigma / math.sqrt(2)),
        "peaks_ordered": ordered,
    }
    return DensitySurface(theta=theta, t=t, density=dens, sigma=state.sigma, peak_index=peak_index,
                          peak_time=peak_time, monotone_decreasing=mono, unimodal=uni,
                          peaks_ordered=ordered, checks=checks)


def density_linf_error(numeric, analytic) -> float:
    """max |P_num - P_an| / max P_an."""
    analytic = np.asarray(analytic)
    return float(np.max(np.abs(np.asarray(numeric) - analytic)) / np.max(analytic))


@dataclass
class CrossValidation:
    sigma: float
    hbar: float
    n_points: int
    dt: float
    t_tip_exact: float
    validity_ratio: float
    regime: str
    t_tip_numeric: dict
    t_tip_rel_error: dict
    density_error_half: dict
    density_error_tip: dict
    norm_drift: dict
    tolerances: dict
    passes: dict

    @property
    def passed(self) -> bool:
        return all(self.passes.values())

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def cross_validate(params: RodParameters, sigma: float, n_points: int = 1024, dt: float | None = None,
                   tolerance: float = 0.05, quadratic_tolerance: float = 0.01) -> CrossValidation:
    """Compare the closed-form tipping time and density with both grid potentials.

    The density error is max |P_num - P_an| / max P_an at t_tip/2 and t_tip.
    ``tolerance`` applies to the cosine potential and ``quadratic_tolerance``
    to the quadratic one.
    """
    state = GaussianState(sigma)
    grid = AngularGrid(n_points)
    t_tip = sc.tipping_time_exact(params, sigma)
    dt = oracle.resolve_time_step(grid, oracle.PotentialSpec("cosine", params), dt)
    tn, terr, e_half, e_tip, drift, passes = {}, {}, {}, {}, {}, {}
    tol = {"cosine": tolerance, "quadratic": quadratic_tolerance}
    for kind in ("cosine", "quadratic"):
        pot = oracle.PotentialSpec(kind, params)
        tn[kind] = oracle.tipping_time_numeric(state, grid, pot, dt)
        terr[kind] = abs(tn[kind] - t_tip) / t_tip
        half = oracle.evolve_numeric(state, 0.5 * t_tip, grid, pot, dt)
        psi = oracle.evolve_numeric(state, t_tip, grid, pot, dt)
        e_half[kind] = density_linf_error(half.density, sc.density_analytic(params, state, grid.nodes, half.t))
        e_tip[kind] = density_linf_error(psi.density, sc.density_analytic(params, state, grid.nodes, psi.t))
        drift[kind] = abs(psi.norm() - 1.0)
        passes[f"t_tip_{kind}"] = terr[kind] <= tol[kind]
        passes[f"density_{kind}"] = max(e_half[kind], e_tip[kind]) <= tol[kind]
    passes["quadratic_not_worse"] = terr["quadratic"] <= terr["cosine"] and e_tip["quadratic"] <= e_tip["cosine"]
    v = sc.validity(params, t_tip)
    passes["validity"] = v.is_valid
    return CrossValidation(
        sigma=sigma, hbar=params.hbar, n_points=n_points, dt=dt, t_tip_exact=t_tip,
        validity_ratio=v.ratio, regime=classical_regime(params).value, t_tip_numeric=tn,
        t_tip_rel_error=terr, density_error_half=e_half, density_error_tip=e_tip, norm_drift=drift,
        tolerances=tol, passes=passes,
    )


def classical_limit_sequence(params: RodParameters, sigma0: float, theta0: float, t0: float,
                             k_max: int = 20) -> list[dict]:
    """P(theta0, t0) along hbar_k = hbar_0 2^-k with sigma_k = sigma0 2^(-k/2).

    ``params.hbar`` is hbar_0. Log-densities are reported as well because the
    density itself underflows long before k_max.
    """
    rows = []
    for k in range(k_max + 1):
        hbar = params.hbar * 2.0 ** (-k)
        sigma = sigma0 * 2.0 ** (-0.5 * k)
        p = params.replace(hbar=hbar)
        rows.append({
            "k": k,
            "hbar": hbar,
            "sigma": sigma,
            "density": float(sc.density_analytic(p, sigma, theta0, t0)),
            "log_density": float(sc.log_density_analytic(p, sigma, theta0, t0)),
        })
    return rows
