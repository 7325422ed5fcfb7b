"""Command-line entry point.

Subcommands:
    run           run an experiment and write rounds.csv / summary.json
    capacity      analyse an instance file round by round
    reduce        generate a hard clique feedback-graph instance and write its reduction
    generate      write a random expert-advice instance file
    bounds        print the closed-form regret bounds
    solver-check  KKT self-test of the Tsallis FTRL solver
    trend         regret of q-FTRL on the hard clique family for several N
"""

import argparse
import asyncio
import csv
import logging
import math
import sys
import time
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from .bounds import restricted_lower_bound_rate, theorem1_bound, theorem2_bound, theorem2_preset_bound
from .capacity import capacity_estimate, q_functional
from .config import RunConfig, Settings, get_settings, parse_seeds
from .environments import build_reduction_instance, generate_hard_fg_losses, generate_random_instance
from .exceptions import LabError
from .instance_io import read_instance, write_instance
from .policies import theorem2_initial_guess
from .services.experiment_pipeline import ExperimentPipeline
from .tsallis import SIMPLEX_TOL, TsallisParams, kkt_residual, solve_ftrl_dual, uniform

logger = logging.getLogger(__name__)

_SOLVER_CHECK_EXPONENTS = (0.5, 0.6563, 0.9)
_SOLVER_CHECK_MAX_EXPERTS = 64


def _configure_logging(settings: Settings) -> None:
    logging.basicConfig(
        level=getattr(logging, settings.log_level),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[
            logging.FileHandler(settings.log_file),
            logging.StreamHandler(),
        ],
    )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_run(args: argparse.Namespace, settings: Settings) -> int:
    overrides = {
        "policy": args.policy,
        "protocol": args.protocol,
        "n_experts": args.n_experts,
        "n_actions": args.n_actions,
        "horizon": args.horizon,
        "initial_guess": args.initial_guess,
        "q": args.q,
        "eta": args.eta,
        "instance_model": args.instance_model,
        "loss_model": args.loss_model,
        "groups": args.groups,
        "gap": args.gap,
        "instance_file": args.instance_file,
        "instance_seed": args.instance_seed,
        "seeds": args.seeds,
        "capacity_diagnostics": args.capacity_diagnostics,
        "out_dir": args.out,
        "max_workers": args.workers,
    }
    config = RunConfig.from_sources(args.config, overrides)
    run_id = f"run_{int(time.time() * 1000)}"
    result = asyncio.run(ExperimentPipeline(config, settings).execute(run_id))
    summary = result.summary
    print(f"rounds:  {result.rounds_path}")
    print(f"summary: {result.summary_path}")
    if summary.mean_regret is not None:
        print(f"mean regret {summary.mean_regret:.3f} +/- {summary.se_regret:.3f} (SE) over "
              f"{len(summary.seeds) - summary.seeds_failed} seed(s)")
    print(f"theorem 1 bound {summary.bounds.theorem1:.3f}")
    if summary.bounds.theorem2_q_average is not None:
        print(f"theorem 2 bound {summary.bounds.theorem2_q_average:.3f} (cbar = mean Q = {summary.mean_q_average:.4f})")
    if summary.seeds_failed:
        print(f"{summary.seeds_failed} seed(s) failed, see {result.summary_path}", file=sys.stderr)
        return 1
    return 0


def _cmd_capacity(args: argparse.Namespace, settings: Settings) -> int:
    instance = read_instance(args.instance)
    max_iters = args.max_iters or settings.capacity_max_iters
    tol = args.tol or settings.capacity_tol
    out_dir = Path(args.out or settings.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "capacity.csv"
    estimates: List[float] = []
    start = time.time()
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["t", "q_uniform", "capacity_estimate", "iterations"])
        for t in range(1, instance.horizon + 1):
            advice, _ = instance.round(t)
            report = capacity_estimate(advice, max_iters, tol)
            estimates.append(report.capacity_estimate)
            writer.writerow([t, q_functional(advice, uniform(instance.n_experts)), report.capacity_estimate,
                             report.iterations])
    logger.info(f"Capacity analysis of {instance.horizon} rounds done in {time.time() - start:.3f}s")
    print(f"capacity: {path}")
    print(f"average capacity estimate {math.fsum(estimates) / len(estimates):.6f} "
          f"(ceiling {min(instance.n_experts, instance.n_actions) - 1})")
    return 0


def _cmd_reduce(args: argparse.Namespace, settings: Settings) -> int:
    graph = generate_hard_fg_losses(args.n_experts, args.n_actions, args.horizon, gap=args.gap, seed=args.seed)
    path = write_instance(build_reduction_instance(graph, args.n_actions), args.out)
    print(f"instance: {path}")
    print(f"cliques {graph.clique_count}, planted vertex {graph.planted_vertex}")
    return 0


def _cmd_generate(args: argparse.Namespace, settings: Settings) -> int:
    instance = generate_random_instance(
        args.n_experts,
        args.n_actions,
        args.horizon,
        advice_model=args.advice_model,
        loss_model=args.loss_model,
        seed=args.seed,
        groups=args.groups,
    )
    print(f"instance: {write_instance(instance, args.out)}")
    return 0


def _cmd_bounds(args: argparse.Namespace, settings: Settings) -> int:
    n, k, t = args.n_experts, args.n_actions, args.horizon
    print(f"theorem 1 bound (N={n}, K={k}, T={t}): {theorem1_bound(n, k, t):.4f}")
    guess = args.initial_guess
    if guess is None:
        guess = min(theorem2_initial_guess(n, t), float(n))
    general = theorem2_bound(n, t, args.cbar, guess)
    preset = theorem2_preset_bound(n, t, args.cbar)
    print(f"theorem 2 bound (cbar={args.cbar}, J={guess:.6g}): {general.value:.4f}")
    print(f"theorem 2 preset-J bound (cbar={args.cbar}): {preset.value:.4f}")
    if not general.applicable:
        print(f"warning: T={t} < ln(e^2 N) = {2.0 + math.log(n):.4f}, theorem 2 does not apply", file=sys.stderr)
    if n > k >= 2:
        print(f"restricted lower-bound rate sqrt(K T ln(N/K)): {restricted_lower_bound_rate(n, k, t):.4f}")
    return 0


def _cmd_solver_check(args: argparse.Namespace, settings: Settings) -> int:
    rng = np.random.default_rng(args.seed)
    worst_residual = worst_simplex = 0.0
    failures = 0
    start = time.time()
    for _ in range(args.trials):
        n = int(rng.integers(1, _SOLVER_CHECK_MAX_EXPERTS + 1))
        params = TsallisParams(q=float(rng.choice(_SOLVER_CHECK_EXPONENTS)), eta=float(rng.uniform(0.01, 1.0)))
        loss = rng.exponential(scale=float(rng.uniform(0.1, 100.0)), size=n)
        solution = solve_ftrl_dual(loss, params)
        residual = kkt_residual(solution, loss, params)
        simplex = abs(float(solution.weights.sum()) - 1.0)
        worst_residual = max(worst_residual, residual)
        worst_simplex = max(worst_simplex, simplex)
        if residual > args.tol or simplex > SIMPLEX_TOL or np.any(solution.weights <= 0.0):
            failures += 1
    elapsed = time.time() - start
    print(f"{args.trials} solves in {elapsed:.2f}s: worst KKT residual {worst_residual:.3e}, "
          f"worst simplex defect {worst_simplex:.3e}, {failures} failure(s)")
    return 1 if failures else 0


def _cmd_trend(args: argparse.Namespace, settings: Settings) -> int:
    out_dir = Path(args.out or settings.output_dir)
    rows = []
    for n in args.n_list:
        config = RunConfig(
            policy="qftrl",
            protocol="restricted",
            instance_model="hard_clique",
            n_experts=n,
            n_actions=args.n_actions,
            horizon=args.horizon,
            gap=args.gap,
            seeds=args.seeds,
            out_dir=out_dir / f"N{n}",
            max_workers=args.workers or settings.max_parallel_workers,
        )
        result = asyncio.run(ExperimentPipeline(config, settings).execute(f"trend_N{n}"))
        rate = restricted_lower_bound_rate(n, args.n_actions, args.horizon)
        summary = result.summary
        rows.append([n, summary.mean_regret, summary.se_regret, rate, summary.mean_regret / rate])
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "trend.csv"
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["N", "mean_regret", "se_regret", "rate", "ratio"])
        writer.writerows(rows)
    print(f"{'N':>6} {'mean regret':>12} {'SE':>9} {'sqrt(KT ln(N/K))':>17} {'ratio':>7}")
    for n, mean, se, rate, ratio in rows:
        print(f"{n:>6} {mean:>12.2f} {se:>9.2f} {rate:>17.2f} {ratio:>7.3f}")
    print(f"trend: {path}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _int_list(text: str) -> List[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _add_dimensions(parser: argparse.ArgumentParser, required: bool) -> None:
    parser.add_argument("--N", dest="n_experts", type=int, required=required, default=None, help="number of experts")
    parser.add_argument("--K", dest="n_actions", type=int, required=required, default=None, help="number of actions")
    parser.add_argument("--T", dest="horizon", type=int, required=required, default=None, help="number of rounds")


def build_argument_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="expert-advice-lab",
        description="Bandits with expert advice: q-FTRL, its doubling variant, EXP4 and their regret bounds.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run an experiment")
    run.add_argument("--config", type=Path, default=None, help="key=value config file")
    run.add_argument("--policy", choices=["exp4", "qftrl", "qftrl-doubling"], default=None)
    run.add_argument("--protocol", choices=["standard", "restricted"], default=None)
    _add_dimensions(run, required=False)
    run.add_argument("--J", dest="initial_guess", type=float, default=None, help="doubling initial guess")
    run.add_argument("--q", type=float, default=None, help="override the tuned Tsallis exponent")
    run.add_argument("--eta", type=float, default=None, help="override the tuned learning rate")
    run.add_argument("--instance-model", choices=["iid_dirichlet", "clustered", "identical", "hard_clique"],
                     default=None)
    run.add_argument("--loss-model", choices=["iid_uniform", "adversarial_switch"], default=None)
    run.add_argument("--groups", type=int, default=None, help="group count of the clustered model")
    run.add_argument("--gap", type=float, default=None, help="planted-vertex advantage of hard_clique")
    run.add_argument("--instance-file", type=Path, default=None)
    run.add_argument("--instance-seed", type=int, default=None, help="share one generated instance across seeds")
    run.add_argument("--seeds", default=None, help="a..b range or comma list")
    run.add_argument("--capacity-diagnostics", action="store_true", default=None)
    run.add_argument("--out", type=Path, default=None, help="output directory")
    run.add_argument("--workers", type=int, default=None)
    run.set_defaults(handler=_cmd_run)

    capacity = commands.add_parser("capacity", help="analyse the capacity of an instance file")
    capacity.add_argument("instance", type=Path)
    capacity.add_argument("--out", type=Path, default=None)
    capacity.add_argument("--max-iters", type=int, default=None)
    capacity.add_argument("--tol", type=float, default=None)
    capacity.set_defaults(handler=_cmd_capacity)

    reduce = commands.add_parser("reduce", help="write the reduction of a hard clique instance")
    _add_dimensions(reduce, required=True)
    reduce.add_argument("--gap", type=float, default=0.05)
    reduce.add_argument("--seed", type=int, default=0)
    reduce.add_argument("--out", type=Path, required=True, help="instance file to write")
    reduce.set_defaults(handler=_cmd_reduce)

    generate = commands.add_parser("generate", help="write a random instance file")
    _add_dimensions(generate, required=True)
    generate.add_argument("--advice-model", choices=["iid_dirichlet", "clustered", "identical"],
                          default="iid_dirichlet")
    generate.add_argument("--loss-model", choices=["iid_uniform", "adversarial_switch"], default="iid_uniform")
    generate.add_argument("--groups", type=int, default=4)
    generate.add_argument("--seed", type=int, default=0)
    generate.add_argument("--out", type=Path, required=True, help="instance file to write")
    generate.set_defaults(handler=_cmd_generate)

    bounds = commands.add_parser("bounds", help="print bound values")
    _add_dimensions(bounds, required=True)
    bounds.add_argument("--cbar", type=float, default=0.0)
    bounds.add_argument("--J", dest="initial_guess", type=float, default=None)
    bounds.set_defaults(handler=_cmd_bounds)

    solver = commands.add_parser("solver-check", help="KKT self-test of the Tsallis solver")
    solver.add_argument("--trials", type=int, default=1000)
    solver.add_argument("--seed", type=int, default=0)
    solver.add_argument("--tol", type=float, default=1e-8)
    solver.set_defaults(handler=_cmd_solver_check)

    trend = commands.add_parser("trend", help="q-FTRL regret on the hard clique family")
    trend.add_argument("--N-list", dest="n_list", type=_int_list, default=[8, 32, 128])
    trend.add_argument("--K", dest="n_actions", type=int, default=4)
    trend.add_argument("--T", dest="horizon", type=int, default=20_000)
    trend.add_argument("--gap", type=float, default=0.05)
    trend.add_argument("--seeds", type=parse_seeds, default=list(range(50)))
    trend.add_argument("--out", type=Path, default=None)
    trend.add_argument("--workers", type=int, default=None)
    trend.set_defaults(handler=_cmd_trend)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_argument_parser().parse_args(argv)
    settings = get_settings()
    _configure_logging(settings)
    try:
        return args.handler(args, settings)
    except (LabError, OSError, ValidationError) as exc:
        logger.error(f"{args.command} failed: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
