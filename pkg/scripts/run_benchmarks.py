#!/usr/bin/env python3
"""Convergence study: multi-seed runs for each benchmark/criterion cell.

Reproduces the benchmark table: for each (problem, criterion,
regularization) cell, runs the optimization loop over independent seeds
and reports the mean and standard deviation of the final IGD+ of the
evaluated points, writing traces and per-run artifacts under --out.
"""

import argparse
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from mobo.acquisition import AcquisitionKind  # noqa: E402
from mobo.driver import RunConfig, export_summary, run_experiment  # noqa: E402
from mobo.problems import by_name  # noqa: E402

DEFAULT_CELLS = [
    ("zdt1", "pi", "none"), ("zdt1", "pi", "max"), ("zdt1", "pi", "sum"),
    ("zdt1", "mpi", "none"), ("zdt1", "ehvi", "none"),
    ("zdt2", "pi", "sum"), ("zdt2", "ehvi", "none"),
    ("zdt3", "pi", "sum"), ("zdt3", "ehvi", "none"),
    ("bnh", "pi", "sum"), ("tnk", "pi", "sum"), ("osy", "pi", "sum"),
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--cells", nargs="*", default=None,
                        help="cells as problem:criterion:reg "
                             "(default: the full benchmark table)")
    parser.add_argument("--reps", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0, help="first seed")
    parser.add_argument("--out", default="results")
    args = parser.parse_args()

    cells = ([tuple(c.split(":")) for c in args.cells]
             if args.cells else DEFAULT_CELLS)
    seeds = tuple(range(args.seed, args.seed + args.reps))
    for name, criterion, reg in cells:
        problem = by_name(name)
        config = RunConfig(kind=AcquisitionKind(criterion, reg), seeds=seeds)
        t0 = time.time()
        summary = run_experiment(problem, config)
        label = f"{name}/{criterion}/{reg}"
        print(f"{label}: final IGD+ mean={summary.final_mean:.4g} "
              f"std={summary.final_std:.4g} "
              f"({time.time() - t0:.0f} s, {args.reps} runs)", flush=True)
        export_summary(summary, os.path.join(args.out, label.replace("/", "_")))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
