"""Command-line interface.

Subcommands:
  solve           one instance -> trajectory CSV
  demo-illposed   the small-data / huge-solution table
  choose-n        print the rule-chosen truncation level
  experiment      full delta-ladder run -> report CSV + summary
  gronwall-check  property sweep of the iterated-integral inequality

Exit codes: 0 success, 2 config error, 3 solver non-convergence,
4 dominance (or inequality) violation.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .bounds import gronwall_bound, gronwall_comparison_solution
from .errors import ConfigError, NoiseTooLargeError, NonConvergenceError
from .harness import (ExperimentConfig, add_noise, build_reference, illposed_table,
                      run_experiment)
from .param_choice import (HOLDER_RULE, LOG_RULE, ChoiceInputs, choose_level)
from .problem import FvpInstance
from .solver import SolverConfig, picard_solve
from .spectral import EigenModel

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3
EXIT_VIOLATION = 4


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _load_config(path: str) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return ExperimentConfig.from_json(text)


def _cmd_solve(args) -> int:
    cfg = _load_config(args.config)
    model = cfg.model()
    reference = build_reference(cfg)
    g = reference.final_data
    delta = args.delta
    data = g if delta == 0.0 else add_noise(g, delta, cfg.direction,
                                            seed=cfg.seed, mode=args.level)
    scfg = SolverConfig(level=args.level, n_steps=cfg.n_steps,
                        picard_tol=cfg.picard_tol, max_iters=cfg.max_iters)
    instance = FvpInstance(model=model, tau=cfg.tau, source=cfg.source(),
                           final_data=g, noisy_data=None if delta == 0 else data,
                           delta=delta)
    res = picard_solve(instance, scfg, data)
    traj = res.trajectory
    header = "t," + ",".join(f"c{j}" for j in range(1, model.mode_count + 1)) + ",l2_norm"
    lines = [header]
    norms = traj.norms()
    for i, t in enumerate(traj.grid.points):
        coeffs = ",".join(_fmt(c) for c in traj.states[i])
        lines.append(f"{_fmt(t)},{coeffs},{_fmt(norms[i])}")
    out = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(out)
        print(f"wrote {args.output} ({res.iterations} iterations, "
              f"defect {res.defect:.3e})")
    else:
        sys.stdout.write(out)
    return EXIT_OK


def _cmd_demo_illposed(args) -> int:
    model = EigenModel.dirichlet_1d(max(args.modes, 1))
    rows = illposed_table(model, args.tau, args.modes)
    print(f"{'n':>3} {'data_norm':>24} {'solution_norm(0)':>24} {'lower_bound(0)':>24}")
    for r in rows:
        print(f"{r['n']:>3} {_fmt(r['data_norm']):>24} "
              f"{_fmt(r['solution_norm_at_0']):>24} {_fmt(r['lower_bound_at_0']):>24}")
    data_ok = all(rows[i + 1]["data_norm"] < rows[i]["data_norm"]
                  for i in range(len(rows) - 1))
    sol_ok = all(rows[i + 1]["solution_norm_at_0"] > rows[i]["solution_norm_at_0"]
                 for i in range(len(rows) - 1))
    bound_ok = all(r["solution_norm_at_0"] >= r["lower_bound_at_0"] for r in rows)
    print(f"data norms strictly decreasing: {data_ok}")
    print(f"solution norms strictly increasing: {sol_ok}")
    print(f"solution >= lower bound everywhere: {bound_ok}")
    return EXIT_OK if (data_ok and sol_ok and bound_ok) else EXIT_VIOLATION


def _cmd_choose_n(args) -> int:
    regime = LOG_RULE if args.rule == "log" else HOLDER_RULE
    ci = ChoiceInputs(regime=regime, rho=args.rho, delta=args.delta, t=args.t,
                      tau=args.tau, d=args.d, e1=args.e1, e2=args.e2,
                      p=args.p, q=args.q)
    choice = choose_level(ci)
    print(f"N = {choice.level}  (raw rule value {choice.raw:.6g}"
          + (", clamped to 1" if choice.clamped else "") + ")")
    return EXIT_OK


def _cmd_experiment(args) -> int:
    cfg = _load_config(args.config)
    report = run_experiment(cfg)
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "experiment.csv").write_text(report.to_csv())
    (outdir / "summary.txt").write_text(report.summary())
    sys.stdout.write(report.summary())
    if report.dominance is not None and not report.dominance.ok:
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_gronwall_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    violations = 0
    worst = math.inf
    for _ in range(args.samples):
        c0 = float(rng.uniform(0.05, 10.0))
        c1 = float(rng.uniform(0.05, 5.0))
        tau = float(rng.uniform(0.5, 2.0))
        pts, u = gronwall_comparison_solution(c0, c1, tau, n_steps=200)
        bound = np.array([gronwall_bound(c0, c1, t, tau) for t in pts])
        margin = float(np.min(bound - u))
        worst = min(worst, margin)
        if np.any(u > bound):
            violations += 1
    print(f"samples: {args.samples}, violations: {violations}, "
          f"worst margin: {worst:.6g}")
    return EXIT_OK if violations == 0 else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fvptrunc",
        description="Spectral-truncation regularization of a backward "
                    "parabolic problem with a memory term")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance, write the trajectory CSV")
    p.add_argument("--config", required=True, help="experiment JSON document")
    p.add_argument("--level", type=int, required=True, help="truncation level N")
    p.add_argument("--delta", type=float, default=0.0, help="noise level (0 = exact data)")
    p.add_argument("--output", default=None, help="CSV path (stdout if omitted)")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("demo-illposed", help="print the instability table")
    p.add_argument("--modes", type=int, default=8)
    p.add_argument("--tau", type=float, default=1.0)
    p.set_defaults(func=_cmd_demo_illposed)

    p = sub.add_parser("choose-n", help="print the rule-chosen truncation level")
    p.add_argument("--rule", choices=("log", "holder"), required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--e1", type=float, default=math.pi ** 2)
    p.add_argument("--e2", type=float, default=math.pi ** 2)
    p.add_argument("--p", type=float, default=0.0)
    p.add_argument("--q", type=float, default=0.0)
    p.set_defaults(func=_cmd_choose_n)

    p = sub.add_parser("experiment", help="run a delta-ladder experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--output-dir", required=True)
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("gronwall-check", help="sweep the iterated-integral inequality")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=_cmd_gronwall_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, NoiseTooLargeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergenceError as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
