"""The regularized solver: truncated growth operator, the integral-equation
fixed-point map, and Picard iteration.

The regularized approximation at truncation level N solves

    v(t) = G_N(tau - t) g  -  int_t^tau G_N(s - t) F(s, v(s)) ds
                          -  int_t^tau G_N(s - t) int_s^tau v(xi) dxi ds,

where G_N(t) keeps the first N modes and multiplies mode j by e^{lambda_j t}.
Successive substitution converges for every N because the m-th iterate of
the map contracts like x^m / m! (x independent of the iterate); the solver
reports the first m at which that a-priori factor drops below one as a
diagnostic, together with the observed increments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ExponentOverflowError, NonConvergenceError
from .grids import TimeGrid, Trajectory
from .problem import FvpInstance
from .spectral import MAX_EXP_ARG, SpectralField
from .quadrature import SCHEME_ORDER, backward_cumulative, exp_kernel_profile

DEFAULT_PICARD_TOL = 1e-11
DEFAULT_MAX_ITERS = 500
DEFAULT_QUADRATURE_ORDER = 6


@dataclass(frozen=True)
class SolverConfig:
    """Truncation level, grid resolution and iteration controls."""

    level: int                       # truncation level N
    n_steps: int
    picard_tol: float = DEFAULT_PICARD_TOL
    max_iters: int = DEFAULT_MAX_ITERS
    acceleration: str = "plain"      # "plain" | "anderson"
    anderson_depth: int = 5
    quadrature_order: int = DEFAULT_QUADRATURE_ORDER

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("truncation level must be >= 1")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.picard_tol <= 0.0:
            raise ValueError("picard_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.acceleration not in ("plain", "anderson"):
            raise ValueError("acceleration must be 'plain' or 'anderson'")
        if self.anderson_depth < 1:
            raise ValueError("anderson_depth must be >= 1")
        if self.quadrature_order not in SCHEME_ORDER:
            raise ValueError(f"quadrature_order must be one of {tuple(SCHEME_ORDER)}")

    def grid(self, tau: float) -> TimeGrid:
        return TimeGrid(tau, self.n_steps)


def apply_spectral_growth(t: float, psi: SpectralField, level: int) -> SpectralField:
    """Keep modes 1..level and multiply mode j by e^{lambda_j t}.

    At t = 0 this is the rank-`level` orthogonal projection.  Raises
    ExponentOverflowError naming the first mode whose growth factor leaves
    the double range while its coefficient is nonzero.
    """
    model = psi.model
    if not 1 <= level <= model.mode_count:
        raise ValueError(f"level must lie in 1..{model.mode_count}")
    if t < 0.0:
        raise ValueError("t must be >= 0")
    lam = model.lambdas[:level]
    out = np.zeros(model.mode_count)
    args = lam * t
    big = args > MAX_EXP_ARG
    if np.any(big & (psi.coeffs[:level] != 0.0)):
        j = int(np.argmax(big & (psi.coeffs[:level] != 0.0))) + 1
        raise ExponentOverflowError(
            f"e^(lambda_{j} t) overflows for t = {t:.6g} (lambda = {lam[j - 1]:.6g})")
    safe = np.where(big, 0.0, args)
    out[:level] = np.where(big, 0.0, np.exp(safe) * psi.coeffs[:level])
    return SpectralField(model, out)


def exp_kernel_integral(lam: float, grid: TimeGrid, w: np.ndarray, t_index: int,
                        order: int = 2) -> float:
    """int_{t}^{tau} e^{lam (s - t)} w(s) ds at grid point t = t_{t_index}.

    w holds samples on the grid; the kernel is integrated exactly against
    the piecewise-polynomial interpolant of the given order (2 = linear,
    the documented default; 6 = the solver's high-order variant).
    """
    if not 0 <= t_index <= grid.n_steps:
        raise IndexError("t_index outside the grid")
    profile = exp_kernel_profile(lam, grid.h, np.asarray(w, dtype=float), order)
    return float(profile[t_index])


def _growth_columns(lam: np.ndarray, back: np.ndarray, data: np.ndarray) -> np.ndarray:
    """e^{lam_j * back_i} * data_j with overflow containment per mode."""
    args = np.outer(back, lam)
    over = args > MAX_EXP_ARG
    if np.any(over):
        bad = np.any(over, axis=0) & (data != 0.0)
        if np.any(bad):
            j = int(np.argmax(bad)) + 1
            raise ExponentOverflowError(
                f"e^(lambda_{j} (tau - t)) overflows (lambda = {lam[j - 1]:.6g})")
        args = np.where(over, 0.0, args)  # zero data: column is zero anyway
    return np.exp(args) * data


def fixed_point_map(v: Trajectory, instance: FvpInstance, cfg: SolverConfig,
                    data: SpectralField) -> Trajectory:
    """One application of the regularized integral-equation map to v.

    Per retained mode j:  e^{lambda_j (tau - t)} data_j  minus the kernel
    integral of F_j(s, v(s)) + W_j(s), where W_j(s) = int_s^tau v_j.
    Modes beyond the truncation level are zero.
    """
    model, grid, N = instance.model, v.grid, cfg.level
    if N > model.mode_count:
        raise ValueError("truncation level exceeds the model mode count")
    lam = model.lambdas[:N]
    pts = grid.points
    order = cfg.quadrature_order

    F = instance.source.apply(pts, v.states[:, :N])
    W = np.empty_like(F)
    for j in range(N):
        W[:, j] = backward_cumulative(grid.h, v.states[:, j], order)
    integrand = F + W

    out = np.zeros_like(v.states)
    out[:, :N] = _growth_columns(lam, instance.tau - pts, data.coeffs[:N])
    for j in range(N):
        out[:, j] -= exp_kernel_profile(lam[j], grid.h, integrand[:, j], order)
    return Trajectory(grid, model, out)


def fixed_point_defect(v: Trajectory, instance: FvpInstance, cfg: SolverConfig,
                       data: SpectralField) -> float:
    """Sup-over-grid L2 norm of v - map(v); zero iff v is a discrete fixed point."""
    return v.sup_distance(fixed_point_map(v, instance, cfg, data))


def apriori_contraction_iteration(kappa: float, lam_n: float, tau: float) -> float:
    """First m with (kappa0 e^(lambda_N tau) (1+tau) tau)^m / m! < 1.

    kappa0 = max(kappa, 1).  Returned as a float because the threshold is
    astronomically large for desk-scale lambda_N tau; it is a diagnostic of
    how pessimistic the a-priori factorial bound is, not an iteration count
    the solver ever waits for.
    """
    kappa0 = max(kappa, 1.0)
    log_x = math.log(kappa0) + lam_n * tau + math.log1p(tau) + math.log(tau)
    if log_x <= 0.0:
        return 1.0
    # m ln x < lgamma(m+1); the crossover sits near e^(1 + ln x)
    if log_x > 702.0:
        return math.inf

    def crosses(m: float) -> bool:
        try:
            return m * log_x >= math.lgamma(m + 1.0)
        except OverflowError:
            return False

    lo, hi = 1.0, max(4.0, 4.0 * math.exp(1.0 + log_x))
    if crosses(hi):
        return math.inf
    while hi - lo > max(1.0, 1e-9 * hi):
        mid = 0.5 * (lo + hi)
        if crosses(mid):
            lo = mid
        else:
            hi = mid
    return float(math.ceil(hi))


@dataclass(frozen=True)
class PicardResult:
    trajectory: Trajectory
    iterations: int
    defect: float
    increments: list[float] = field(repr=False)
    apriori_contraction_m: float = math.nan


def _anderson_update(x_hist: list[np.ndarray], g_hist: list[np.ndarray]) -> np.ndarray:
    """Type-II Anderson mixing step from iterate/image history."""
    R = np.stack([g - x for g, x in zip(g_hist, x_hist)], axis=1)  # residuals
    dR = R[:, 1:] - R[:, :-1]
    if dR.size == 0:
        return g_hist[-1]
    gamma, *_ = np.linalg.lstsq(dR, R[:, -1], rcond=None)
    G = np.stack(g_hist, axis=1)
    dG = G[:, 1:] - G[:, :-1]
    out = g_hist[-1] - dG @ gamma
    if not np.all(np.isfinite(out)):
        return g_hist[-1]
    return out


def picard_solve(instance: FvpInstance, cfg: SolverConfig, data: SpectralField,
                 initial: Trajectory | None = None) -> PicardResult:
    """Iterate the fixed-point map to convergence.

    Starts from v_0(t) = G_N(tau - t) data (the map's leading term) unless
    `initial` is given.  Stops when the sup-norm increment falls below
    picard_tol * (1 + ||v||); raises NonConvergenceError with the increment
    history when max_iters is exhausted.
    """
    grid = cfg.grid(instance.tau)
    model = instance.model
    N = cfg.level

    if initial is None:
        lead = np.zeros((grid.n_steps + 1, model.mode_count))
        lead[:, :N] = _growth_columns(model.lambdas[:N], instance.tau - grid.points,
                                      data.coeffs[:N])
        v = Trajectory(grid, model, lead)
    else:
        if initial.grid.n_steps != grid.n_steps:
            raise ValueError("initial trajectory must live on the solver grid")
        v = initial

    increments: list[float] = []
    x_hist: list[np.ndarray] = []
    g_hist: list[np.ndarray] = []
    converged = False
    its = 0
    for its in range(1, cfg.max_iters + 1):
        image = fixed_point_map(v, instance, cfg, data)
        if cfg.acceleration == "anderson":
            x_hist.append(v.states.ravel().copy())
            g_hist.append(image.states.ravel().copy())
            if len(x_hist) > cfg.anderson_depth:
                x_hist.pop(0)
                g_hist.pop(0)
            nxt = Trajectory(grid, model,
                             _anderson_update(x_hist, g_hist).reshape(v.states.shape))
        else:
            nxt = image
        inc = v.sup_distance(nxt)
        increments.append(inc)
        v = nxt
        if inc <= cfg.picard_tol * (1.0 + v.sup_norm()):
            converged = True
            break

    defect = fixed_point_defect(v, instance, cfg, data)
    if not converged:
        raise NonConvergenceError(
            f"no convergence after {cfg.max_iters} iterations "
            f"(last increment {increments[-1]:.3e})",
            increments=increments, defect=defect)
    m_star = apriori_contraction_iteration(instance.source.kappa,
                                           model.lambdas[N - 1], instance.tau)
    return PicardResult(trajectory=v, iterations=its, defect=defect,
                        increments=increments, apriori_contraction_m=m_star)
