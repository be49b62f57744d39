"""Uniform angular grid on the open interval (-pi/2, pi/2) and sampled wavefunctions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

MIN_POINTS = 64


@dataclass(frozen=True)
class AngularGrid:
    """``n_points`` interior nodes; the walls at +-pi/2 carry implicit zeros."""

    n_points: int = 1024

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < MIN_POINTS:
            raise DomainError(f"grid needs an integer n_points >= {MIN_POINTS}, got {self.n_points!r}")

    @property
    def spacing(self) -> float:
        return math.pi / (self.n_points + 1)

    @property
    def nodes(self) -> np.ndarray:
        j = np.arange(1, self.n_points + 1)
        # symmetric by construction: node j and node n+1-j are exact negatives
        return (j - (self.n_points + 1) / 2.0) * self.spacing

    def bracket(self, theta: float) -> tuple[int, float]:
        """Index ``j`` and weight ``w`` with theta = (1-w) nodes[j] + w nodes[j+1]."""
        x = (theta + math.pi / 2) / self.spacing - 1.0
        j = int(math.floor(x))
        if j < 0 or j >= self.n_points - 1:
            raise DomainError(f"theta={theta!r} is outside the interior node range")
        return j, x - j


@dataclass
class WaveFunction:
    grid: AngularGrid
    amplitudes: np.ndarray
    t: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.grid.n_points,):
            raise DomainError(
                f"amplitudes shape {self.amplitudes.shape} does not match grid of {self.grid.n_points} nodes"
            )

    @property
    def theta(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def density(self) -> np.ndarray:
        return self.amplitudes.real ** 2 + self.amplitudes.imag ** 2

    def norm(self) -> float:
        # trapezoid rule with zero end values reduces to a plain sum
        return float(np.sum(self.density) * self.grid.spacing)

    def mean_theta(self) -> float:
        return float(np.sum(self.theta * self.density) * self.grid.spacing)

    def density_at(self, theta: float) -> float:
        """Density linearly interpolated between the two bracketing nodes."""
        j, w = self.grid.bracket(theta)
        rho = self.density
        return float((1.0 - w) * rho[j] + w * rho[j + 1])
