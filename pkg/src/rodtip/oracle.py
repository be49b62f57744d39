"""Grid solver for the time-dependent Schrodinger equation of the rod.

H = -(hbar^2 / 2I) d^2/dtheta^2 + V(theta) on (-pi/2, pi/2) with hard walls,
discretised by second-order central differences and stepped with the Cayley
form (1 + i dt H / 2 hbar)^-1 (1 - i dt H / 2 hbar). The scheme is unitary,
so the discrete norm is conserved to round-off. The stepper measures energy
from the upright value V(0) = mga, matching the phase convention of the
closed-form wavefunction (whose Lagrangian carries no constant term).

This solver shares no density or tipping formulas with :mod:`rodtip.semiclassical`
(only the validity window that bounds the search); it is the
independent check on the closed-form density and tipping time.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .core import GaussianState, RodParameters, derive
from .errors import DomainError, NoInteriorMaximumError, SolverError
from .grid import AngularGrid, WaveFunction
from .search import parabolic_vertex
from .semiclassical import VALIDITY_HARD_LIMIT, validity_time_limit

MIN_NODES_PER_PACKET = 16


class PotentialKind(str, enum.Enum):
    FULL_COSINE = "cosine"
    QUADRATIC = "quadratic"


@dataclass(frozen=True)
class PotentialSpec:
    kind: PotentialKind
    params: RodParameters

    def __post_init__(self):
        object.__setattr__(self, "kind", PotentialKind(self.kind))

    @property
    def reference(self) -> float:
        """V(0) = mga, the energy origin used by the time stepper."""
        p = self.params
        return p.mass * p.gravity * p.half_length

    def values(self, theta):
        p = self.params
        mga = p.mass * p.gravity * p.half_length
        theta = np.asarray(theta, dtype=float)
        if self.kind is PotentialKind.FULL_COSINE:
            return mga * np.cos(theta)
        return mga * (1.0 - 0.5 * theta ** 2)


def hamiltonian_bands(grid: AngularGrid, pot: PotentialSpec, shift: float = 0.0):
    """Main diagonal and (constant) off-diagonal of the finite-difference H - shift."""
    p = pot.params
    inertia = derive(p).moment_of_inertia
    kin = p.hbar ** 2 / (2.0 * inertia * grid.spacing ** 2)
    return 2.0 * kin + (pot.values(grid.nodes) - shift), -kin


def apply_hamiltonian(psi: np.ndarray, diag: np.ndarray, off: float) -> np.ndarray:
    out = diag * psi
    out[1:] += off * psi[:-1]
    out[:-1] += off * psi[1:]
    return out


def energy(psi: WaveFunction, pot: PotentialSpec) -> float:
    diag, off = hamiltonian_bands(psi.grid, pot)
    h_psi = apply_hamiltonian(psi.amplitudes, diag, off)
    return float(np.real(np.vdot(psi.amplitudes, h_psi)) * psi.grid.spacing)


def default_time_step(grid: AngularGrid, params: RodParameters) -> float:
    """min(0.01 / Omega, I dtheta^2 / hbar): resolves both the dynamics and the grid."""
    d = derive(params)
    return min(0.01 / d.Omega, d.moment_of_inertia * grid.spacing ** 2 / params.hbar)


class CayleyStepper:
    """Implicit-midpoint propagator for a fixed grid, potential and time step."""

    def __init__(self, grid: AngularGrid, pot: PotentialSpec, dt: float):
        if not dt > 0:
            raise DomainError(f"time step must be positive, got {dt!r}")
        self.grid = grid
        self.pot = pot
        self.dt = float(dt)
        # energies measured from V(0): only the global phase changes, but the
        # Cayley phase error, which grows with |E| dt / hbar, drops sharply
        diag, off = hamiltonian_bands(grid, pot, shift=pot.reference)
        self._diag, self._off = diag, off
        self._c = 0.5j * self.dt / pot.params.hbar
        n = grid.n_points
        ab = np.empty((3, n), dtype=complex)
        ab[0, 0] = 0.0
        ab[0, 1:] = self._c * off
        ab[1] = 1.0 + self._c * diag
        ab[2, :-1] = self._c * off
        ab[2, -1] = 0.0
        self._ab = ab

    def condition_estimate(self) -> float:
        # A = 1 + iK with K real symmetric: cond(A) = sqrt(1+max k^2)/sqrt(1+min k^2),
        # eigenvalues of K bounded by Gershgorin discs
        scale = abs(self._c)
        lo = scale * (np.min(self._diag) - 2 * abs(self._off))
        hi = scale * (np.max(self._diag) + 2 * abs(self._off))
        kmax = max(abs(lo), abs(hi))
        kmin = 0.0 if lo <= 0 <= hi else min(abs(lo), abs(hi))
        return math.sqrt(1 + kmax ** 2) / math.sqrt(1 + kmin ** 2)

    def __call__(self, amplitudes: np.ndarray) -> np.ndarray:
        rhs = amplitudes - self._c * apply_hamiltonian(amplitudes, self._diag, self._off)
        try:
            out = solve_banded((1, 1), self._ab, rhs, check_finite=False)
        except (LinAlgError, ValueError) as exc:
            raise SolverError(
                f"tridiagonal solve failed ({exc}); estimated condition number {self.condition_estimate():.3e}"
            ) from exc
        if not np.all(np.isfinite(out)):
            raise SolverError(
                f"tridiagonal solve produced non-finite values; estimated condition number "
                f"{self.condition_estimate():.3e}"
            )
        return out


def discretize_initial(state: GaussianState, grid: AngularGrid) -> WaveFunction:
    """Sample the initial Gaussian and renormalise so the discrete norm is exactly 1."""
    theta = grid.nodes
    inside = np.count_nonzero(np.abs(theta) <= 3 * state.sigma)
    if inside < MIN_NODES_PER_PACKET:
        raise DomainError(
            f"only {inside} grid nodes within 3 sigma (sigma={state.sigma:g}); "
            f"need {MIN_NODES_PER_PACKET}, use a finer grid"
        )
    amps = state.amplitude(theta).astype(complex)
    amps /= math.sqrt(np.sum(amps.real ** 2) * grid.spacing)
    return WaveFunction(grid, amps, t=0.0, meta={"engine": "numeric"})


def step(psi: WaveFunction, dt: float, pot: PotentialSpec) -> WaveFunction:
    """One Cayley step. Builds the solver each call; use :class:`CayleyStepper` in loops."""
    stepper = CayleyStepper(psi.grid, pot, dt)
    return WaveFunction(psi.grid, stepper(psi.amplitudes), t=psi.t + dt, meta=dict(psi.meta))


def resolve_time_step(grid, pot, dt=None):
    """Default dt, or ``dt`` itself after checking it resolves dynamics and grid."""
    bound = default_time_step(grid, pot.params)
    if dt is None:
        return bound
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt!r}")
    if dt > bound * (1 + 1e-12):
        raise DomainError(
            f"dt={dt:.6g} does not resolve the dynamics and grid; need dt <= min(0.01/Omega, I dtheta^2/hbar) = {bound:.6g}"
        )
    return float(dt)


def iter_evolution(psi0: WaveFunction, pot: PotentialSpec, dt: float, t_end: float):
    """Yield the state after each step; the last step is shortened to land on ``t_end``."""
    stepper = CayleyStepper(psi0.grid, pot, dt)
    n_full = int(math.floor(t_end / dt * (1 + 1e-12)))
    amps = psi0.amplitudes
    t = psi0.t
    for k in range(1, n_full + 1):
        amps = stepper(amps)
        t = psi0.t + k * dt
        yield WaveFunction(psi0.grid, amps, t=t, meta=dict(psi0.meta))
    rest = t_end - n_full * dt
    if rest > 1e-12 * dt:
        amps = CayleyStepper(psi0.grid, pot, rest)(amps)
        yield WaveFunction(psi0.grid, amps, t=psi0.t + t_end, meta=dict(psi0.meta))


def evolve_numeric(state: GaussianState, t: float, grid: AngularGrid, pot: PotentialSpec,
                   dt: float | None = None, snapshot_every: float | None = None):
    """Evolve the discretised Gaussian to time ``t``.

    Returns the final :class:`WaveFunction`, or ``(final, snapshots)`` when
    ``snapshot_every`` is given; snapshots include t = 0 and the final time.
    """
    if t < 0:
        raise DomainError("evolve_numeric needs t >= 0")
    dt = resolve_time_step(grid, pot, dt)
    psi = discretize_initial(state, grid)
    snapshots = [psi] if snapshot_every else None
    next_snap = snapshot_every
    for psi in iter_evolution(psi, pot, dt, t):
        if snapshots is not None and psi.t >= next_snap * (1 - 1e-12):
            snapshots.append(psi)
            while next_snap <= psi.t * (1 + 1e-12):
                next_snap += snapshot_every
    if snapshots is None:
        return psi
    if snapshots[-1] is not psi:
        snapshots.append(psi)
    return psi, snapshots


def sigma_density_series(state: GaussianState, grid: AngularGrid, pot: PotentialSpec,
                         dt: float | None = None, theta: float | None = None,
                         drop: float = 1e-3):
    """P(theta, t) on the time lattice, stopping once the peak is clearly passed.

    ``theta`` defaults to sigma. Evolution stops when the density has fallen
    ``drop`` (relative) below its running maximum, or at the hard validity
    limit of the short-time propagator.
    """
    dt = resolve_time_step(grid, pot, dt)
    theta = state.sigma if theta is None else theta
    t_max = validity_time_limit(pot.params, VALIDITY_HARD_LIMIT)
    psi = discretize_initial(state, grid)
    times = [0.0]
    values = [psi.density_at(theta)]
    best = values[0]
    for psi in iter_evolution(psi, pot, dt, t_max):
        p = psi.density_at(theta)
        times.append(psi.t)
        values.append(p)
        best = max(best, p)
        k = int(np.argmax(values))
        if 0 < k <= len(values) - 3 and p < (1.0 - drop) * best:
            break
    return np.array(times), np.array(values)


def tipping_time_numeric(state: GaussianState, grid: AngularGrid, pot: PotentialSpec,
                         dt: float | None = None) -> float:
    """Time of the maximum of the grid density at theta = sigma."""
    times, values = sigma_density_series(state, grid, pot, dt)
    k = int(np.argmax(values))
    if k == 0 or k >= len(values) - 1:
        raise NoInteriorMaximumError(
            f"no interior maximum of P(sigma, t) before t={times[-1]:.6g} (validity ratio reaches "
            f"{VALIDITY_HARD_LIMIT:g}); the short-time picture has broken down"
        )
    return float(parabolic_vertex(times, values, k))
