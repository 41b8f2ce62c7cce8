#!/usr/bin/env python3
"""Regenerate the analytic reference fronts under data/reference_fronts/."""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from mobo.pareto import reference_front  # noqa: E402
from mobo.problems import BENCHMARKS, by_name  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=1000,
                        help="points per front (default 1000)")
    parser.add_argument("--out-dir",
                        default=os.path.join(os.path.dirname(__file__),
                                             "..", "data", "reference_fronts"))
    args = parser.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)
    for name in sorted(BENCHMARKS):
        front = reference_front(by_name(name), args.count)
        path = os.path.join(args.out_dir, f"{name}.csv")
        with open(path, "w") as handle:
            handle.write("f1,f2\n")
            for row in front.points:
                handle.write(",".join(f"{v:.17g}" for v in row) + "\n")
        print(f"{name}: {front.points.shape[0]} points -> {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
