"""Uniform time grids and time-indexed spectral trajectories."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import EigenModel, SpectralField, _readonly, scaled_norm_rows


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_i = i tau / n_steps, i = 0..n_steps."""

    tau: float
    n_steps: int

    def __post_init__(self):
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")
        if self.n_steps < 1:
            raise ValueError("n_steps must be a positive integer")
        pts = np.linspace(0.0, self.tau, self.n_steps + 1)
        object.__setattr__(self, "_points", _readonly(pts))

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def h(self) -> float:
        return self.tau / self.n_steps

    def index_of(self, t: float) -> int:
        """Grid index of t; t must be a grid point (up to rounding)."""
        i = int(round(t / self.h))
        if not 0 <= i <= self.n_steps or abs(self.points[i] - t) > 1e-9 * max(self.tau, 1.0):
            raise ValueError(f"t = {t} is not a grid point of {self}")
        return i


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One SpectralField per grid point; piecewise-linear in time between them.

    states[i, j-1] is the coefficient of mode j at t_i.
    """

    grid: TimeGrid
    model: EigenModel
    states: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "states", _readonly(self.states))
        expected = (self.grid.n_steps + 1, self.model.mode_count)
        if self.states.shape != expected:
            raise ValueError(f"states must have shape {expected}, got {self.states.shape}")

    @staticmethod
    def zero(grid: TimeGrid, model: EigenModel) -> "Trajectory":
        return Trajectory(grid, model, np.zeros((grid.n_steps + 1, model.mode_count)))

    def state(self, i: int) -> SpectralField:
        return SpectralField(self.model, self.states[i])

    def at_time(self, t: float) -> SpectralField:
        return self.state(self.grid.index_of(t))

    def norms(self) -> np.ndarray:
        """Per-grid-point L2 norms (overflow-safe)."""
        return scaled_norm_rows(self.states)

    def sup_norm(self) -> float:
        """max over grid points of the L2 norm (the C([0,tau]; L2) norm)."""
        return float(self.norms().max())

    def sup_distance(self, other: "Trajectory") -> float:
        """Sup-over-time L2 distance; grids must share their points or nest."""
        if self.grid.n_steps == other.grid.n_steps:
            if abs(self.grid.tau - other.grid.tau) > 1e-12 * max(self.grid.tau, 1.0):
                raise ValueError("trajectories live on different time intervals")
            d = self.states - other.states
        else:
            fine, coarse = (self, other) if self.grid.n_steps > other.grid.n_steps else (other, self)
            r, rem = divmod(fine.grid.n_steps, coarse.grid.n_steps)
            if rem != 0:
                raise ValueError("grids are not nested; cannot compare trajectories")
            d = fine.states[::r] - coarse.states
        return float(scaled_norm_rows(d).max())
