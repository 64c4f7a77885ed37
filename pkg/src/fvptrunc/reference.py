"""Exact and self-convergent reference solutions.

For a linear source F = c u the mode ODE

    u' + lambda u = c u + int_t^tau u ds,   u(tau) = 1,

has the closed-form solution

    u(t) = (alpha e^{-alpha (tau-t)} - beta e^{-beta (tau-t)}) / (alpha - beta)

where alpha, beta are the roots of r^2 + (lambda - c) r + 1 = 0.  Single
modes (and, by linearity, their combinations) therefore give exact ground
truth.  The same closed form drives the instability demonstration: data of
norm 1/|beta_n| produces a solution of norm >= e^{|beta_n| (tau-t)}/|beta_n|.

For nonlinear sources no closed form exists; references are produced by a
grid-refinement ladder whose successive differences must contract at the
quadrature order, with a Richardson error estimate attached.  Existence of
the underlying exact solution is an assumption there; the ladder only
certifies the discretization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ReferenceRejectedError, UnsupportedRegimeError
from .grids import TimeGrid, Trajectory
from .problem import FvpInstance
from .quadrature import SCHEME_ORDER
from .solver import SolverConfig, picard_solve
from .spectral import EigenModel, SpectralField


@dataclass(frozen=True)
class LinearModeRoots:
    """Roots of r^2 + (lambda - c) r + 1 = 0, with alpha beta = 1."""

    alpha: float
    beta: float
    lam: float
    c: float


def mode_roots(lam: float, c: float) -> LinearModeRoots:
    """Stable root pair for a single mode of the linear-source problem.

    beta (the larger in magnitude) is computed by the add-the-square-root
    branch of the quadratic formula, alpha as 1/beta; this avoids the
    cancellation the subtractive branch would suffer for large lambda.
    """
    s = lam - c
    disc = s * s - 4.0
    if disc <= 0.0:
        raise UnsupportedRegimeError(
            f"(lambda - c)^2 must exceed 4 for real distinct roots; got lambda={lam}, c={c}")
    beta = -0.5 * (s + math.sqrt(disc))
    alpha = 1.0 / beta
    return LinearModeRoots(alpha=alpha, beta=beta, lam=lam, c=c)


def mode_coefficient(roots: LinearModeRoots, tau: float, t) -> np.ndarray:
    """u(t) of the closed form, normalized to u(tau) = 1."""
    a, b = roots.alpha, roots.beta
    w = tau - np.asarray(t, dtype=float)
    return (a * np.exp(-a * w) - b * np.exp(-b * w)) / (a - b)


@dataclass(frozen=True)
class ReferenceSolution:
    """Ground-truth trajectory with its final data.

    provenance 'closed_form' means exact up to rounding; 'self_convergent'
    means a fine-grid solve whose accuracy is the attached Richardson
    estimate.  The trajectory at t = tau equals final_data coefficient-wise.
    """

    trajectory: Trajectory
    final_data: SpectralField
    provenance: str
    error_estimate: float = 0.0

    def __post_init__(self):
        if self.provenance not in ("closed_form", "self_convergent"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if not np.array_equal(self.trajectory.states[-1], self.final_data.coeffs):
            raise ValueError("trajectory at tau must equal the final data exactly")


def closed_form_solution(model: EigenModel, n: int, c: float, tau: float,
                         grid: TimeGrid) -> ReferenceSolution:
    """Single-mode exact solution with final data phi_n."""
    if not 1 <= n <= model.mode_count:
        raise IndexError(f"mode index {n} out of range 1..{model.mode_count}")
    if abs(grid.tau - tau) > 1e-12 * max(tau, 1.0):
        raise ValueError("grid must span [0, tau]")
    roots = mode_roots(model.eigenvalue(n), c)
    states = np.zeros((grid.n_steps + 1, model.mode_count))
    states[:, n - 1] = mode_coefficient(roots, tau, grid.points)
    states[-1, n - 1] = 1.0  # (alpha - beta)/(alpha - beta), exactly
    return ReferenceSolution(
        trajectory=Trajectory(grid, model, states),
        final_data=SpectralField.basis(model, n),
        provenance="closed_form")


def combined_closed_form(model: EigenModel, weights, c: float, tau: float,
                         grid: TimeGrid) -> ReferenceSolution:
    """Exact solution with final data sum_n w_n phi_n (linear source only)."""
    states = np.zeros((grid.n_steps + 1, model.mode_count))
    data = np.zeros(model.mode_count)
    for n, w in weights:
        if w == 0.0:
            continue
        roots = mode_roots(model.eigenvalue(n), c)
        states[:, n - 1] = w * mode_coefficient(roots, tau, grid.points)
        states[-1, n - 1] = w
        data[n - 1] = w
    return ReferenceSolution(
        trajectory=Trajectory(grid, model, states),
        final_data=SpectralField(model, data),
        provenance="closed_form")


@dataclass(frozen=True)
class IllposedPair:
    """The instability example at one mode: small data, huge solution.

    data_norm = 1/|beta_n| shrinks with n while the solution norm at any
    t < tau exceeds e^{|beta_n| (tau - t)} / |beta_n|, which blows up.
    """

    mode: int
    tau: float
    data_norm: float
    roots: LinearModeRoots

    def solution_norm(self, t) -> np.ndarray:
        """Exact ||v(t)|| from the closed form."""
        return np.abs(mode_coefficient(self.roots, self.tau, t)) * self.data_norm

    def lower_bound(self, t) -> np.ndarray:
        """e^{|beta| (tau - t)} / |beta|."""
        b = abs(self.roots.beta)
        return np.exp(b * (self.tau - np.asarray(t, dtype=float))) / b


def illposed_pair(model: EigenModel, n: int, tau: float) -> IllposedPair:
    """Data/solution pair for the source F = u demonstrating instability."""
    roots = mode_roots(model.eigenvalue(n), 1.0)
    return IllposedPair(mode=n, tau=tau, data_norm=1.0 / abs(roots.beta), roots=roots)


def check_ladder_contraction(diffs, ratios, floor: float = 0.0):
    """Gate: each refinement must shrink the difference by >= 3 per halving.

    `diffs[i]` is the sup distance between ladder solves i and i+1,
    `ratios[i]` the corresponding resolution ratio.  Differences at or
    below `floor` count as converged.  Raises ReferenceRejectedError on
    the first failing pair.
    """
    for i in range(len(diffs) - 1):
        if diffs[i + 1] <= floor:
            continue
        # diffs[i] ~ err(n_i), diffs[i+1] ~ err(n_{i+1}): the shrink is
        # governed by the resolution ratio of the first pair
        required = 3.0 ** math.log2(ratios[i])
        if diffs[i] / diffs[i + 1] < required:
            raise ReferenceRejectedError(
                f"ladder differences {diffs[i]:.3e} -> {diffs[i + 1]:.3e} shrink by "
                f"{diffs[i] / diffs[i + 1]:.2f} < required {required:.2f}")


def self_convergent_reference(instance: FvpInstance, ladder: list[SolverConfig]) -> ReferenceSolution:
    """Reference by grid refinement for sources without a closed form.

    Requires >= 3 configs at a common truncation level with strictly
    increasing (nested) grid resolutions and exact data (delta = 0).  Each
    successive sup-norm difference must shrink by at least 3 per grid
    halving (scaled accordingly for other ratios); otherwise the ladder is
    rejected.  The finest solve is returned, tagged with a Richardson
    error estimate from the last difference.
    """
    if len(ladder) < 3:
        raise ValueError("self-convergence ladder needs at least 3 configs")
    levels = {cfg.level for cfg in ladder}
    if len(levels) != 1:
        raise ValueError("ladder configs must share one truncation level")
    steps = [cfg.n_steps for cfg in ladder]
    if any(b <= a for a, b in zip(steps, steps[1:])):
        raise ValueError("ladder resolutions must be strictly increasing")
    if any(b % a for a, b in zip(steps, steps[1:])):
        raise ValueError("ladder resolutions must be nested (each divides the next)")
    if instance.delta != 0.0 or instance.final_data is None:
        raise ValueError("self-convergent references require exact data (delta = 0)")

    solves = [picard_solve(instance, cfg, instance.final_data).trajectory for cfg in ladder]
    diffs = [solves[i + 1].sup_distance(solves[i]) for i in range(len(solves) - 1)]
    floor = 1e-13 * max(s.sup_norm() for s in solves)  # rounding floor: treat as converged
    check_ladder_contraction(diffs, [b / a for a, b in zip(steps, steps[1:])], floor)

    order = SCHEME_ORDER[ladder[-1].quadrature_order]
    r_last = steps[-1] / steps[-2]
    est = diffs[-1] / (r_last ** order - 1.0)
    finest = solves[-1]
    return ReferenceSolution(
        trajectory=finest,
        final_data=finest.state(finest.grid.n_steps),
        provenance="self_convergent",
        error_estimate=float(est))
