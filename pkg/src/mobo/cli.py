"""Command-line interface: single runs, multi-seed experiments, a direct
NSGA-II baseline, front scoring and reference-front generation."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .acquisition import AcquisitionKind
from .driver import (RunConfig, export_record, export_summary, run_bo,
                     run_experiment)
from .inner_opt import InnerOptConfig
from .nsga2 import Nsga2Config, run_nsga2
from .pareto import igd_plus, reference_front
from .problems import by_name, external_problem


def _add_problem_args(parser):
    parser.add_argument("--problem", help="benchmark name (zdt1..3, bnh, tnk, osy)")
    parser.add_argument("--dim", type=int, default=None, help="dimension for ZDT problems")
    parser.add_argument("--external-cmd", default=None,
                        help="external evaluator command (line protocol)")
    parser.add_argument("--lower", default=None,
                        help="comma-separated lower bounds for --external-cmd")
    parser.add_argument("--upper", default=None,
                        help="comma-separated upper bounds for --external-cmd")


def _resolve_problem(args):
    if args.external_cmd:
        if args.lower is None or args.upper is None:
            raise SystemExit("--external-cmd requires --lower and --upper")
        lower = [float(v) for v in args.lower.split(",")]
        upper = [float(v) for v in args.upper.split(",")]
        return external_problem(args.external_cmd, lower, upper)
    if not args.problem:
        raise SystemExit("one of --problem or --external-cmd is required")
    return by_name(args.problem, args.dim)


def _add_bo_args(parser):
    parser.add_argument("--acq", default="pi", choices=["pi", "mpi", "ehvi"])
    parser.add_argument("--reg", default="none", choices=["none", "max", "sum"])
    parser.add_argument("--beta", type=float, default=100.0)
    parser.add_argument("--budget", type=int, default=None, help="total evaluations (default 20d)")
    parser.add_argument("--doe", type=int, default=None, help="initial DoE size (default 2d+2c+1)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--inner-starts", type=int, default=20)
    parser.add_argument("--inner-evals", type=int, default=200)
    parser.add_argument("--out", default=None, help="output directory")


def _run_config(args, repetitions=1, seeds=None):
    return RunConfig(
        kind=AcquisitionKind(args.acq, args.reg, args.beta),
        total_budget=args.budget, doe_size=args.doe,
        repetitions=repetitions, seeds=seeds,
        inner=InnerOptConfig(starts=args.inner_starts,
                             evals_per_start=args.inner_evals))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mobo",
        description="Constrained multi-objective Bayesian optimization")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single optimization run")
    _add_problem_args(p_run)
    _add_bo_args(p_run)

    p_exp = sub.add_parser("experiment", help="multi-seed experiment protocol")
    _add_problem_args(p_exp)
    _add_bo_args(p_exp)
    p_exp.add_argument("--reps", type=int, default=10)

    p_ga = sub.add_parser("nsga2", help="direct NSGA-II baseline")
    _add_problem_args(p_ga)
    p_ga.add_argument("--pop", type=int, default=100)
    p_ga.add_argument("--gens", type=int, default=50)
    p_ga.add_argument("--seed", type=int, default=0)
    p_ga.add_argument("--out", default=None, help="front CSV output path")

    p_score = sub.add_parser("score", help="IGD+ of a front file vs a reference file")
    p_score.add_argument("front", help="CSV with header f1,f2[,...]")
    p_score.add_argument("reference", help="CSV with header f1,f2[,...]")

    p_ref = sub.add_parser("reference", help="emit an analytic reference front")
    _add_problem_args(p_ref)
    p_ref.add_argument("--count", type=int, default=1000)
    p_ref.add_argument("--out", default=None, help="front CSV output path")

    args = parser.parse_args(argv)

    if args.command == "run":
        problem = _resolve_problem(args)
        record = run_bo(problem, _run_config(args), args.seed)
        trace = record.igd_trace
        final = trace[-1] if len(trace) else float("nan")
        print(f"{problem.name} seed={args.seed} evaluations={record.dataset.l} "
              f"final_igd_plus={final:.6g} completed={record.completed}")
        if record.error:
            print(f"error: {record.error}", file=sys.stderr)
        if args.out:
            export_record(record, args.out)
        return 0 if record.completed else 1

    if args.command == "experiment":
        problem = _resolve_problem(args)
        seeds = tuple(range(args.seed, args.seed + args.reps))
        summary = run_experiment(problem, _run_config(args, args.reps, seeds))
        print(f"{problem.name} {summary.config['criterion']}"
              f"(reg={summary.config['regularization']}) runs={len(seeds)} "
              f"final_igd_plus mean={summary.final_mean:.6g} "
              f"std={summary.final_std:.6g}")
        if args.out:
            export_summary(summary, args.out)
        return 0

    if args.command == "nsga2":
        problem = _resolve_problem(args)
        front = run_nsga2(problem.evaluate, problem.domain,
                          Nsga2Config(population=args.pop, generations=args.gens,
                                      seed=args.seed))
        print(f"{problem.name} nsga2 pop={args.pop} gens={args.gens} "
              f"front_size={front.size}")
        if args.out:
            with open(args.out, "w") as handle:
                handle.write(front.to_csv())
        return 0

    if args.command == "score":
        attained = _read_front_csv(args.front)
        reference = _read_front_csv(args.reference)
        print(f"{igd_plus(attained, reference):.17g}")
        return 0

    if args.command == "reference":
        problem = _resolve_problem(args)
        front = reference_front(problem, args.count)
        text_rows = ["f1,f2"] + [",".join(f"{v:.17g}" for v in row)
                                 for row in front.points]
        text = "\n".join(text_rows) + "\n"
        if args.out:
            with open(args.out, "w") as handle:
                handle.write(text)
        else:
            sys.stdout.write(text)
        return 0

    raise SystemExit(f"unknown command {args.command!r}")


def _read_front_csv(path: str) -> np.ndarray:
    with open(path) as handle:
        lines = [ln.strip() for ln in handle if ln.strip()]
    return np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])


if __name__ == "__main__":
    raise SystemExit(main())
