"""Acceptance criteria, one test each, at the stated tolerances.

Each test prints a ``PASS``/``FAIL`` line (visible with ``-s``) and the lines
are repeated in the terminal summary.
"""
import math

import numpy as np
import pytest
from scipy.integrate import quad

from rodtip import GaussianState, RodParameters, derive, natural_units
from rodtip import semiclassical as sc
from rodtip.analysis import (
    SweepSpec,
    classical_limit_sequence,
    cross_validate,
    figure1_curves,
    fit_power_law,
    run_sweep,
)
from rodtip.grid import AngularGrid
from rodtip.oracle import PotentialSpec, discretize_initial, evolve_numeric


@pytest.fixture
def record(acceptance_log):
    def _record(number, name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:2d}  {name}: {detail}"
        print("\n" + line)
        acceptance_log.append(line)
        assert ok, line
    return _record


def test_01_formula_consistency(record):
    rng = np.random.default_rng(20240611)
    worst = 0.0
    for _ in range(50):
        m = 10 ** rng.uniform(-3, 1)
        a = 10 ** rng.uniform(-3, 0)
        g = rng.uniform(1.0, 20.0)
        omega = math.sqrt(g / a)
        ratio = 10 ** rng.uniform(0.01, 2)  # de Broglie ratio > 1
        p = RodParameters(m, a, g, ratio * m * a * a * omega)
        assert derive(p).de_broglie_ratio > 1
        sigma = rng.uniform(0.01, 0.3)
        exact = sc.tipping_time_exact(p, sigma)
        peak = sc.density_peak_time(p, sigma, sigma)
        worst = max(worst, abs(peak - exact) / exact)
    record(1, "peak time at theta=sigma equals closed form", worst <= 1e-8,
           f"max rel diff {worst:.2e} over 50 draws (tol 1e-8)")


def test_02_oracle_agreement(record):
    cv = cross_validate(natural_units(0.01), 0.1, n_points=1024)
    t_cos, t_quad = cv.t_tip_rel_error["cosine"], cv.t_tip_rel_error["quadratic"]
    d_cos, d_quad = cv.density_error_tip["cosine"], cv.density_error_tip["quadratic"]
    ok = t_cos <= 0.05 and d_cos <= 0.05 and t_quad <= 0.01 and d_quad <= 0.01
    record(2, "grid oracle vs closed form", ok,
           f"t_tip err cosine {t_cos:.2e} (5%), quadratic {t_quad:.2e} (1%); "
           f"density Linf at t_tip cosine {d_cos:.2e} (5%), quadratic {d_quad:.2e} (1%)")


def _norm(p, sigma, t, lo, hi):
    f = lambda x: abs(sc.evolve_analytic(p, sigma, t, theta=np.array([x]))[0]) ** 2  # noqa: E731
    return quad(f, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=400)[0]


def test_03_unitarity(record):
    # analytic state: on its own domain (the whole line) at the headline setting, and
    # between the walls where the packet stays inside them (hbar >= 0.1, sigma 0.1-0.2)
    worst_line = 0.0
    p = natural_units(0.01)
    for t in np.linspace(0.0, sc.validity_time_limit(p, 0.1) * (1 - 1e-9), 40):
        worst_line = max(worst_line, abs(_norm(p, 0.1, t, -np.inf, np.inf) - 1))
    worst_wall = 0.0
    for hbar in (0.1, 1.0):
        p = natural_units(hbar)
        for sigma in (0.1, 0.2):
            for t in np.linspace(0.0, sc.validity_time_limit(p, 0.1) * (1 - 1e-9), 20):
                worst_wall = max(worst_wall, abs(_norm(p, sigma, t, -math.pi / 2, math.pi / 2) - 1))
    # numeric: full evolutions to the hard validity limit, both potentials
    drift = 0.0
    p = natural_units(0.01)
    t_end = sc.validity_time_limit(p, 1.0)
    for kind in ("cosine", "quadratic"):
        psi = evolve_numeric(GaussianState(0.1), t_end, AngularGrid(1024), PotentialSpec(kind, p))
        drift = max(drift, abs(psi.norm() - 1))
    ok = worst_line <= 1e-4 and worst_wall <= 1e-4 and drift <= 1e-8
    record(3, "unitarity", ok,
           f"analytic |norm-1| line {worst_line:.1e}, walls {worst_wall:.1e} (tol 1e-4); "
           f"numeric drift {drift:.1e} (tol 1e-8)")


def test_04_delta_limit(record):
    p = natural_units(0.01)
    t = 1e-4 / derive(p).Omega
    theta = np.linspace(-0.5, 0.5, 101)
    states = {
        "gaussian": lambda x: np.exp(-x ** 2 / (2 * 0.1 ** 2)),
        "odd": lambda x: x * np.exp(-x ** 2 / (2 * 0.15 ** 2)),
        "complex": lambda x: np.exp(-(x - 0.1) ** 2 / 0.02) * (1 + 0.5j * x),
    }
    errs = {}
    for name, f in states.items():
        out = sc.apply_propagator(p, f, theta, t, support=(-0.9, 0.9))
        errs[name] = np.linalg.norm(out - f(theta)) / np.linalg.norm(f(theta))
    psi0 = discretize_initial(GaussianState(0.1), AngularGrid(1024))
    out = sc.apply_propagator(p, psi0, theta, t, support=(-0.9, 0.9))
    ref = GaussianState(0.1).amplitude(theta)
    errs["grid-sampled"] = np.linalg.norm(out - ref) / np.linalg.norm(ref)
    worst = max(errs.values())
    record(4, "delta limit at Omega t = 1e-4", worst < 1e-3,
           f"max relative L2 error {worst:.1e} over {len(errs)} states (tol 1e-3)")


def test_05_sigma_squared_scaling(record):
    spec = SweepSpec("sigma", np.geomspace(0.01, 0.05, 25), natural_units(1.0), 0.1)
    rows = run_sweep(spec)
    fit = fit_power_law([r["sigma"] for r in rows], [r["t_tip_exact"] for r in rows])
    ok = abs(fit.exponent - 2.0) <= 0.05 and fit.r_squared > 0.999
    record(5, "t_tip ~ sigma^2", ok, f"exponent {fit.exponent:.6f} (2 +- 0.05), r^2 {fit.r_squared:.9f} (> 0.999)")


def test_06_omega_monotone(record):
    spec = SweepSpec("omega", np.geomspace(0.1, 10.0, 100), natural_units(0.01), 0.1)
    t = np.array([r["t_tip_exact"] for r in run_sweep(spec)])
    ok = bool(np.all(np.diff(t) < 0))
    record(6, "t_tip decreasing in omega", ok, f"100 points over [0.1, 10], max step {np.max(np.diff(t)):.3e}")


def test_07_classical_limit(record):
    p = natural_units(1.0)
    t0 = sc.tipping_time_exact(p, 0.1)
    rows = classical_limit_sequence(p, 0.1, 0.3, t0, k_max=20)
    logs = np.array([r["log_density"] for r in rows])
    strictly = bool(np.all(np.diff(logs) < 0))
    final = rows[-1]["density"]
    record(7, "classical limit", strictly and final < 1e-6,
           f"P(0.3, t0) strictly decreasing over k=0..20: {strictly}; "
           f"P at k=20 = {final:.3e}, log P = {logs[-1]:.4g} (need P < 1e-6)")


def test_08_uncertainty_product(record):
    exact_ratios, lin_ratios = [], []
    for hbar in (0.01, 0.1, 1.0, 10.0):
        p = natural_units(hbar)
        for sigma in (0.01, 0.02, 0.05, 0.1, 0.2, 0.3):
            if sc.asinh_argument(p, sigma) >= sc.LINEARIZED_ARGUMENT:
                continue
            exact_ratios.append(sc.uncertainty_product(p, sigma, tip="exact") / hbar)
            lin_ratios.append(sc.uncertainty_product(p, sigma) / hbar)
    in_band = all(0.5 <= r <= 2.0 for r in exact_ratios)
    lin_dev = max(abs(r - 1) for r in lin_ratios)
    ok = in_band and lin_dev <= 4 * np.finfo(float).eps and len(exact_ratios) >= 10
    record(8, "uncertainty product", ok,
           f"exact-t ratios in [{min(exact_ratios):.4f}, {max(exact_ratios):.4f}] (band [0.5, 2]); "
           f"linearized |ratio-1| <= {lin_dev:.1e} over {len(lin_ratios)} cases")


def test_09_density_curve_shapes(record):
    p = natural_units(0.01)
    s = GaussianState(0.3)
    t = np.linspace(0.0, sc.validity_time_limit(p, 1.0), 800)
    surf = figure1_curves(p, s, [0.0, 0.3, 0.5, 0.7], t)
    ok = all(surf.checks.values())
    peaks = ", ".join(f"{x:.4f}" for x in surf.peak_time[1:])
    record(9, "density-vs-time curve shapes (sigma=0.3)", ok, f"{surf.checks}; peak times {peaks}")


def test_10_analytic_limits(record):
    p = natural_units(1.0)
    d = derive(p)
    small = p.replace(hbar=1e-12 * d.stiffness)
    target = math.log(1 + math.sqrt(2)) / d.Omega
    rel = abs(sc.tipping_time_exact(small, 0.1) - target) / target
    sig = np.geomspace(1e-2, 1e-5, 7)
    lin = np.array([sc.tipping_time_exact(p, s) / s ** 2 for s in sig]) / (d.moment_of_inertia / p.hbar)
    dev = np.abs(lin - 1)
    converging = bool(np.all(np.diff(dev) <= 0)) and dev[0] > dev[-1] and dev[-1] < 1e-9
    ok = rel <= 1e-10 and converging
    record(10, "analytic limits", ok,
           f"hbar->0 rel err {rel:.1e} (1e-10); t_tip/sigma^2 -> I/hbar, deviation {dev[0]:.1e} -> {dev[-1]:.1e}")
