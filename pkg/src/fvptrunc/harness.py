"""Experiment runner: noise injection, delta ladders, rate fits, CSV output.

A single JSON document configures an experiment; see `ExperimentConfig`.
Every cell (evaluation time, noise level, trial) is solved independently
with a deterministic per-cell seed, so identical configurations reproduce
byte-identical CSV output.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .bounds import (BoundInputs, DominanceReport, DominanceSample, check_dominance,
                     log_total_bound, noise_bound, total_bound, truncation_bound)
from .errors import ConfigError, NonConvergenceError
from .grids import TimeGrid
from .param_choice import (HOLDER_RULE, LOG_RULE, ChoiceInputs, choose_level)
from .problem import FvpInstance, SourceFunction
from .quadrature import SCHEME_ORDER
from .reference import (ReferenceSolution, closed_form_solution, combined_closed_form,
                        illposed_pair, self_convergent_reference)
from .solver import DEFAULT_QUADRATURE_ORDER, SolverConfig, picard_solve
from .spectral import EigenModel, GevreyParams, SpectralField, gevrey_norm, l2_norm

DESK_SCALE_EXPONENT_CAP = 700.0  # reject configs with lambda_N * tau above this
RHO_SAFETY = 1.01                # grid-max to essential-sup safety factor


# --------------------------------------------------------------------------
# noise injection

def add_noise(g: SpectralField, delta: float, direction: str = "seeded_random",
              seed: int = 0, mode: int | None = None) -> SpectralField:
    """g + delta * e with ||e|| = 1 (post-normalization).

    direction 'worst_case_mode' sets e to the basis mode `mode` (the
    direction the noise bound amplifies hardest); 'seeded_random' draws a
    deterministic direction over all model modes from `seed`.  The noise
    vector is rescaled once after rounding so its stored norm equals delta
    to a few ulp.
    """
    if delta < 0.0:
        raise ValueError("delta must be >= 0")
    if delta == 0.0:
        return g
    m = g.model.mode_count
    if direction == "worst_case_mode":
        if mode is None or not 1 <= mode <= m:
            raise ValueError("worst_case_mode needs a valid mode index")
        e = np.zeros(m)
        e[mode - 1] = 1.0
    elif direction == "seeded_random":
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        e = rng.standard_normal(m)
        if not np.any(e):
            e[0] = 1.0
    else:
        raise ValueError(f"unknown noise direction {direction!r}")
    e = e / np.linalg.norm(e)
    d = delta * e
    d *= delta / np.linalg.norm(d)
    return SpectralField(g.model, g.coeffs + d)


# --------------------------------------------------------------------------
# configuration

_SOURCE_KEYS = {"zero": set(), "linear": {"c"}, "sin": set()}


def _check_keys(obj: dict, allowed: set, where: str):
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Mirror of the JSON experiment document."""

    tau: float
    mode_count: int
    source_kind: str
    source_c: float
    reference_kind: str               # "closed_form" | "self_convergent"
    reference_data: tuple             # ((mode, coeff), ...)
    deltas: tuple
    direction: str
    seed: int
    trials: int
    n_steps: int
    picard_tol: float
    max_iters: int
    regime: str                       # "log_rule" | "holder_rule"
    p: float
    q: float
    rho: float | str                  # number or "certified"
    eval_times: tuple

    @staticmethod
    def from_json(text: str) -> "ExperimentConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return ExperimentConfig.from_dict(doc)

    @staticmethod
    def from_dict(doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config document must be a JSON object")
        _check_keys(doc, {"instance", "noise", "solver", "choice", "eval_times"}, "config")
        for section in ("instance", "noise", "solver", "choice", "eval_times"):
            if section not in doc:
                raise ConfigError(f"missing config section {section!r}")

        inst = doc["instance"]
        _check_keys(inst, {"tau", "mode_count", "source", "reference"}, "instance")
        src = inst.get("source", {})
        kind = src.get("kind")
        if kind not in _SOURCE_KEYS:
            raise ConfigError(f"instance.source.kind must be one of {sorted(_SOURCE_KEYS)}")
        _check_keys(src, {"kind"} | _SOURCE_KEYS[kind], "instance.source")
        ref = inst.get("reference", {})
        rkind = ref.get("kind")
        if rkind == "closed_form":
            _check_keys(ref, {"kind", "mode"}, "instance.reference")
            rdata = ((int(ref.get("mode", 1)), 1.0),)
        elif rkind == "self_convergent":
            _check_keys(ref, {"kind", "data"}, "instance.reference")
            data = ref.get("data")
            if not isinstance(data, list) or not data:
                raise ConfigError("instance.reference.data must be a non-empty list of [mode, coeff]")
            rdata = tuple((int(m), float(c)) for m, c in data)
        else:
            raise ConfigError("instance.reference.kind must be 'closed_form' or 'self_convergent'")

        noise = doc["noise"]
        _check_keys(noise, {"deltas", "direction", "seed", "trials"}, "noise")
        deltas = tuple(float(d) for d in noise.get("deltas", []))
        if not deltas:
            raise ConfigError("noise.deltas must be a non-empty list")
        if any(b >= a for a, b in zip(deltas, deltas[1:])):
            raise ConfigError("noise.deltas must be strictly decreasing")
        if any(d <= 0 for d in deltas):
            raise ConfigError("noise.deltas must be positive")
        direction = noise.get("direction", "seeded_random")
        if direction not in ("seeded_random", "worst_case_mode"):
            raise ConfigError("noise.direction must be 'seeded_random' or 'worst_case_mode'")

        solver = doc["solver"]
        _check_keys(solver, {"n_steps", "picard_tol", "max_iters"}, "solver")

        choice = doc["choice"]
        _check_keys(choice, {"regime", "p", "q", "rho"}, "choice")
        regime = choice.get("regime")
        if regime not in (LOG_RULE, HOLDER_RULE):
            raise ConfigError(f"choice.regime must be '{LOG_RULE}' or '{HOLDER_RULE}'")
        if regime == LOG_RULE and "q" in choice:
            raise ConfigError("choice.q is not used by the log rule")
        if regime == HOLDER_RULE and "p" in choice:
            raise ConfigError("choice.p is not used by the holder rule")
        rho = choice.get("rho", "certified")
        if not (rho == "certified" or (isinstance(rho, (int, float)) and rho > 0)):
            raise ConfigError("choice.rho must be a positive number or 'certified'")

        times = doc["eval_times"]
        if not isinstance(times, list) or not times:
            raise ConfigError("eval_times must be a non-empty list")

        cfg = ExperimentConfig(
            tau=float(inst.get("tau", 1.0)),
            mode_count=int(inst.get("mode_count", 8)),
            source_kind=kind,
            source_c=float(src.get("c", 0.0)),
            reference_kind=rkind,
            reference_data=rdata,
            deltas=deltas,
            direction=direction,
            seed=int(noise.get("seed", 0)),
            trials=int(noise.get("trials", 3)),
            n_steps=int(solver.get("n_steps", 1024)),
            picard_tol=float(solver.get("picard_tol", 1e-11)),
            max_iters=int(solver.get("max_iters", 500)),
            regime=regime,
            p=float(choice.get("p", 0.0)),
            q=float(choice.get("q", 0.0)),
            rho=rho if rho == "certified" else float(rho),
            eval_times=tuple(float(t) for t in times),
        )
        cfg.validate()
        return cfg

    def validate(self):
        if self.tau <= 0:
            raise ConfigError("instance.tau must be positive")
        if self.mode_count < 1:
            raise ConfigError("instance.mode_count must be >= 1")
        if self.trials < 1:
            raise ConfigError("noise.trials must be >= 1")
        if self.n_steps < 16 or self.n_steps % 2:
            raise ConfigError("solver.n_steps must be an even integer >= 16")
        if self.regime == LOG_RULE and not self.p > 0.0:
            raise ConfigError("the log rule needs choice.p > 0")
        if self.regime == HOLDER_RULE and not self.q > 0.0:
            raise ConfigError("the holder rule needs choice.q > 0")
        if any(t < 0 or t > self.tau for t in self.eval_times):
            raise ConfigError("eval_times must lie in [0, tau]")
        grid = TimeGrid(self.tau, self.n_steps)
        for t in self.eval_times:
            try:
                grid.index_of(t)
            except ValueError as exc:
                raise ConfigError(f"eval time {t} is not a grid point") from exc
        if self.reference_kind == "self_convergent":
            if self.source_kind != "sin":
                # linear/zero sources have exact closed forms; use them
                raise ConfigError("self_convergent references are for the nonlinear source")
            if self.n_steps < 64 or self.n_steps % 4:
                raise ConfigError("self_convergent references need n_steps divisible "
                                  "by 4 and >= 64")
        if self.source_kind in ("zero", "linear") and self.reference_kind != "closed_form":
            raise ConfigError("linear and zero sources use closed_form references")

    def source(self) -> SourceFunction:
        if self.source_kind == "zero":
            return SourceFunction.zero()
        if self.source_kind == "linear":
            return SourceFunction.linear(self.source_c)
        return SourceFunction.bounded_nonlinear("sin")

    def model(self) -> EigenModel:
        return EigenModel.dirichlet_1d(self.mode_count)


# --------------------------------------------------------------------------
# rate fitting

class RateFit(NamedTuple):
    slope: float
    intercept: float
    r2: float
    stderr: float
    ci95: tuple


def fit_rate_logs(log_x: np.ndarray, log_y: np.ndarray) -> RateFit:
    log_x = np.asarray(log_x, dtype=float)
    log_y = np.asarray(log_y, dtype=float)
    if log_x.size < 4:
        raise ValueError("rate fits need at least 4 points")
    slope, intercept = np.polyfit(log_x, log_y, 1)
    fitted = slope * log_x + intercept
    ss_res = float(np.sum((log_y - fitted) ** 2))
    ss_tot = float(np.sum((log_y - log_y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    dof = log_x.size - 2
    sxx = float(np.sum((log_x - log_x.mean()) ** 2))
    stderr = math.sqrt(ss_res / dof / sxx) if dof > 0 and sxx > 0 else 0.0
    half = 1.96 * stderr
    return RateFit(slope=float(slope), intercept=float(intercept), r2=r2,
                   stderr=stderr, ci95=(float(slope - half), float(slope + half)))


def fit_rate(points) -> RateFit:
    """Least squares on (ln delta, ln error); needs >= 4 positive pairs."""
    pts = [(float(d), float(e)) for d, e in points]
    if len(pts) < 4:
        raise ValueError("rate fits need at least 4 points")
    if any(d <= 0 or e <= 0 for d, e in pts):
        raise ValueError("rate fits need positive deltas and errors")
    return fit_rate_logs(np.log([d for d, _ in pts]), np.log([e for _, e in pts]))


# --------------------------------------------------------------------------
# experiment runner

@dataclass(frozen=True)
class ExperimentRow:
    t: float
    delta: float
    seed: int
    level: int
    measured_error: float
    truncation_bound: float
    noise_bound: float
    total_bound: float
    iterations: int
    residual: float


@dataclass
class ExperimentReport:
    rows: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)          # t -> RateFit | None
    flags: list = field(default_factory=list)
    dominance: DominanceReport | None = None
    rho: float = math.nan
    reference: ReferenceSolution | None = None

    CSV_HEADER = ("t,delta,seed,N,measured_error,truncation_bound,"
                  "noise_bound,total_bound,iterations,residual")

    def to_csv(self) -> str:
        def fmt(x: float) -> str:
            return f"{x:.17g}"

        lines = [self.CSV_HEADER]
        for r in self.rows:
            lines.append(",".join([
                fmt(r.t), fmt(r.delta), str(r.seed), str(r.level),
                fmt(r.measured_error), fmt(r.truncation_bound),
                fmt(r.noise_bound), fmt(r.total_bound),
                str(r.iterations), fmt(r.residual),
            ]))
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        lines = [f"rho = {self.rho:.6g}", f"rows = {len(self.rows)}"]
        for t, fit in sorted(self.fits.items()):
            if fit is None:
                lines.append(f"t = {t:g}: no rate fit (insufficient ladder)")
            else:
                lines.append(f"t = {t:g}: fitted slope {fit.slope:.4f} "
                             f"(95% CI {fit.ci95[0]:.4f}..{fit.ci95[1]:.4f}, r2 {fit.r2:.4f})")
        if self.dominance is not None:
            lines.append(f"dominance: {self.dominance.total - len(self.dominance.violations)}"
                         f"/{self.dominance.total} rows below bound"
                         + ("" if self.dominance.ok else "  [VIOLATIONS]"))
        for fl in self.flags:
            lines.append(f"flag: {fl}")
        return "\n".join(lines) + "\n"


def _certified_rho(reference: ReferenceSolution, gp: GevreyParams) -> float:
    traj = reference.trajectory
    worst = max(gevrey_norm(traj.state(i), gp) for i in range(traj.grid.n_steps + 1))
    if worst <= 0.0:
        raise ConfigError("cannot certify rho: reference has zero weighted norm")
    return RHO_SAFETY * worst


def build_reference(cfg: ExperimentConfig) -> ReferenceSolution:
    model = cfg.model()
    grid = TimeGrid(cfg.tau, cfg.n_steps)
    if cfg.reference_kind == "closed_form":
        c = cfg.source_c if cfg.source_kind == "linear" else 0.0
        if len(cfg.reference_data) == 1:
            return closed_form_solution(model, cfg.reference_data[0][0], c, cfg.tau, grid)
        return combined_closed_form(model, cfg.reference_data, c, cfg.tau, grid)
    data = SpectralField.from_coeffs(model, cfg.reference_data)
    instance = FvpInstance(model=model, tau=cfg.tau, source=cfg.source(),
                           final_data=data)
    level = max(m for m, _ in cfg.reference_data)
    ladder = [SolverConfig(level=level, n_steps=cfg.n_steps // 4,
                           picard_tol=cfg.picard_tol, max_iters=cfg.max_iters),
              SolverConfig(level=level, n_steps=cfg.n_steps // 2,
                           picard_tol=cfg.picard_tol, max_iters=cfg.max_iters),
              SolverConfig(level=level, n_steps=cfg.n_steps,
                           picard_tol=cfg.picard_tol, max_iters=cfg.max_iters)]
    return self_convergent_reference(instance, ladder)


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Solve every (t, delta, trial) cell with the rule-chosen level.

    Per cell: choose N by the configured rule, perturb the final data,
    solve, measure the error against the reference at t, and record the
    theoretical bounds.  Per t, fit ln(error) vs ln(delta) over the ladder
    (max error across trials) when it has >= 4 points.
    """
    model = cfg.model()
    source = cfg.source()
    reference = build_reference(cfg)
    g = reference.final_data
    regime = "gevrey_p" if cfg.regime == LOG_RULE else "gevrey_q"
    gp = GevreyParams(cfg.p, cfg.tau) if regime == "gevrey_p" \
        else GevreyParams(0.0, cfg.q + cfg.tau)
    rho = _certified_rho(reference, gp) if cfg.rho == "certified" else float(cfg.rho)
    if any(d >= rho for d in cfg.deltas):
        raise ConfigError("every delta must be below rho")

    report = ExperimentReport(rho=rho, reference=reference)
    grid = TimeGrid(cfg.tau, cfg.n_steps)
    order = SCHEME_ORDER[DEFAULT_QUADRATURE_ORDER]
    kappa = source.kappa
    solve_cache: dict = {}
    samples = []

    for t in cfg.eval_times:
        series = []
        for di, delta in enumerate(cfg.deltas):
            worst_err = -math.inf
            for trial in range(cfg.trials):
                ci = ChoiceInputs(regime=cfg.regime, rho=rho, delta=delta,
                                  t=t, tau=cfg.tau, d=model.dimension,
                                  e1=model.e1, e2=model.e2, p=cfg.p, q=cfg.q)
                level = choose_level(ci).level
                if level > model.mode_count:
                    level = model.mode_count
                    report.flags.append(
                        f"level capped at mode_count for t={t:g}, delta={delta:g}")
                if model.eigenvalue(level) * cfg.tau > DESK_SCALE_EXPONENT_CAP:
                    raise ConfigError(
                        f"desk-scale guard: lambda_{level} * tau = "
                        f"{model.eigenvalue(level) * cfg.tau:.3g} > {DESK_SCALE_EXPONENT_CAP}")
                seed = int(np.random.SeedSequence(cfg.seed, spawn_key=(di, trial))
                           .generate_state(1)[0])
                key = (level, di, trial)
                if key not in solve_cache:
                    noisy = add_noise(g, delta, cfg.direction, seed=seed, mode=level)
                    instance = FvpInstance(model=model, tau=cfg.tau, source=source,
                                           final_data=g, noisy_data=noisy, delta=delta)
                    scfg = SolverConfig(level=level, n_steps=cfg.n_steps,
                                        picard_tol=cfg.picard_tol, max_iters=cfg.max_iters)
                    coarse_cfg = SolverConfig(level=level, n_steps=cfg.n_steps // 2,
                                              picard_tol=cfg.picard_tol,
                                              max_iters=cfg.max_iters)
                    try:
                        res = picard_solve(instance, scfg, noisy)
                        coarse = picard_solve(instance, coarse_cfg, noisy)
                    except NonConvergenceError as exc:
                        raise NonConvergenceError(
                            f"cell (t={t:g}, delta={delta:g}, trial={trial}) did not "
                            f"converge: {exc}", increments=exc.increments,
                            defect=exc.defect) from exc
                    rich = res.trajectory.sup_distance(coarse.trajectory) / (2 ** order - 1)
                    solve_cache[key] = (res, rich)
                res, rich = solve_cache[key]
                idx = grid.index_of(t)
                err = l2_norm(reference.trajectory.state(idx) - res.trajectory.state(idx))
                bi = BoundInputs(model=model, level=level, t=t, tau=cfg.tau,
                                 delta=delta, rho=rho, kappa=kappa,
                                 regime=regime, p=cfg.p, q=cfg.q)
                slack = 10.0 * rich + reference.error_estimate
                samples.append(DominanceSample(inputs=bi, measured=err, slack=slack))
                report.rows.append(ExperimentRow(
                    t=t, delta=delta, seed=seed, level=level,
                    measured_error=err,
                    truncation_bound=truncation_bound(bi),
                    noise_bound=noise_bound(bi),
                    total_bound=total_bound(bi),
                    iterations=res.iterations, residual=res.defect))
                worst_err = max(worst_err, err)
            series.append((delta, worst_err))
        if len(series) >= 4 and all(e > 0 for _, e in series):
            report.fits[t] = fit_rate(series)
        else:
            report.fits[t] = None
            report.flags.append(f"insufficient ladder for a rate fit at t={t:g}")
        errs = [e for _, e in series]
        if any(b > a * (1 + 1e-12) for a, b in zip(errs, errs[1:])):
            report.flags.append(f"errors not non-increasing along the ladder at t={t:g}")

    report.dominance = check_dominance(samples)
    if not report.dominance.ok:
        report.flags.append(
            f"dominance violated on {len(report.dominance.violations)} rows")
    return report


# --------------------------------------------------------------------------
# theory-side rate check (bound staircase under the holder rule)

@dataclass(frozen=True)
class StaircaseResult:
    deltas: tuple
    levels: tuple
    log_bounds: tuple
    fit: RateFit
    theoretical_slope: float

    @property
    def non_increasing(self) -> bool:
        lb = self.log_bounds
        return all(b <= a + 1e-12 for a, b in zip(lb, lb[1:]))


def holder_bound_staircase(model: EigenModel, tau: float, t: float, q: float,
                           rho: float, kappa: float, n_points: int = 8,
                           r_min: float = 1.5, r_max: float = 5.2) -> StaircaseResult:
    """Total-bound decay along a ladder sampled uniformly in the rule variable.

    The rule floor makes the chosen level a staircase in delta, so the
    bound's decay only approximates the theoretical delta-power; sampling
    uniformly in r = (ln(rho/delta)/denom)^{d/2} spreads the ladder evenly
    across level transitions.  Deltas stay within the double range.
    """
    denom = model.e1 * (q + t) + model.e2 * (tau - t)
    rs = np.linspace(r_min, r_max, n_points)
    deltas, levels, log_bounds = [], [], []
    for r in rs:
        log_delta = math.log(rho) - denom * r ** (2.0 / model.dimension)
        if log_delta < -700.0:
            raise ValueError("ladder extends past the double range; reduce r_max")
        delta = math.exp(log_delta)
        ci = ChoiceInputs(regime=HOLDER_RULE, rho=rho, delta=delta, t=t, tau=tau,
                          d=model.dimension, e1=model.e1, e2=model.e2, q=q)
        level = min(choose_level(ci).level, model.mode_count)
        bi = BoundInputs(model=model, level=level, t=t, tau=tau, delta=delta,
                         rho=rho, kappa=kappa, regime="gevrey_q", q=q)
        deltas.append(delta)
        levels.append(level)
        log_bounds.append(log_total_bound(bi))
    fit = fit_rate_logs(np.log(deltas), np.array(log_bounds))
    theo = model.e1 * (q + t) / denom
    return StaircaseResult(deltas=tuple(deltas), levels=tuple(levels),
                           log_bounds=tuple(log_bounds), fit=fit,
                           theoretical_slope=theo)


# --------------------------------------------------------------------------
# the instability table (CLI demo)

def illposed_table(model: EigenModel, tau: float, n_modes: int) -> list[dict]:
    """Per-mode rows of the blow-up demonstration."""
    rows = []
    for n in range(1, n_modes + 1):
        pair = illposed_pair(model, n, tau)
        rows.append({
            "n": n,
            "data_norm": pair.data_norm,
            "solution_norm_at_0": float(pair.solution_norm(0.0)),
            "lower_bound_at_0": float(pair.lower_bound(0.0)),
        })
    return rows
