"""Benchmark problem definitions and an external black-box evaluator client.

The six analytic benchmarks (ZDT1-3, BNH, TNK, OSY) carry samplers for
their known Pareto sets so reference fronts can be regenerated at will.
"""

from __future__ import annotations

import selectors
import subprocess
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .doe import BoxDomain

EvalResult = tuple[np.ndarray, np.ndarray, np.ndarray]


@dataclass(frozen=True)
class ProblemDefinition:
    name: str
    d: int
    n: int
    p: int
    m: int
    domain: BoxDomain
    evaluate: Callable[[np.ndarray], EvalResult]
    pareto_sampler: Callable[[int, int], np.ndarray] | None = None

    @property
    def constraint_count(self) -> int:
        return self.p + self.m

    def true_feasible(self, g, h, eq_tolerance: float = 1e-4) -> bool:
        g = np.asarray(g, float)
        h = np.asarray(h, float)
        ok_g = g.size == 0 or bool(np.all(g >= 0.0))
        ok_h = h.size == 0 or bool(np.all(np.abs(h) <= eq_tolerance))
        return ok_g and ok_h


def _no_constraints():
    return np.empty(0), np.empty(0)


def zdt(variant: int, d: int = 2) -> ProblemDefinition:
    """Canonical ZDT1/2/3 with g(x) = 1 + 9 * mean(x_2..x_d)."""
    if variant not in (1, 2, 3):
        raise ValueError("variant must be 1, 2 or 3")
    if d < 2:
        raise ValueError("ZDT problems need d >= 2")

    def evaluate(x, variant=variant, d=d):
        x = np.asarray(x, float)
        f1 = x[0]
        g = 1.0 + 9.0 * np.sum(x[1:]) / (d - 1)
        ratio = f1 / g
        if variant == 1:
            f2 = g * (1.0 - np.sqrt(ratio))
        elif variant == 2:
            f2 = g * (1.0 - ratio ** 2)
        else:
            f2 = g * (1.0 - np.sqrt(ratio) - ratio * np.sin(10.0 * np.pi * f1))
        return np.array([f1, f2]), *_no_constraints()

    def sampler(count, seed, variant=variant):
        if variant == 3:
            # The disconnected front keeps only ~27% of a dense sweep, so
            # oversample until at least `count` points survive filtering.
            from .pareto import nondominated_mask
            sweep = 4 * count
            while True:
                f1 = np.linspace(0.0, 1.0, sweep)
                f2 = 1.0 - np.sqrt(f1) - f1 * np.sin(10.0 * np.pi * f1)
                pts = np.column_stack([f1, f2])
                pts = pts[nondominated_mask(pts)]
                if pts.shape[0] >= count:
                    idx = np.linspace(0, pts.shape[0] - 1, count).round().astype(int)
                    return pts[idx]
                sweep *= 2
        f1 = np.linspace(0.0, 1.0, count)
        f2 = 1.0 - np.sqrt(f1) if variant == 1 else 1.0 - f1 ** 2
        return np.column_stack([f1, f2])

    return ProblemDefinition(f"zdt{variant}", d, 2, 0, 0,
                             BoxDomain(np.zeros(d), np.ones(d)),
                             evaluate, sampler)


def bnh() -> ProblemDefinition:
    def evaluate(x):
        x1, x2 = np.asarray(x, float)
        f = np.array([4 * x1 ** 2 + 4 * x2 ** 2,
                      (x1 - 5) ** 2 + (x2 - 5) ** 2])
        g = np.array([-(x1 - 5) ** 2 - x2 ** 2 + 25.0,
                      (x1 - 8) ** 2 + (x2 + 3) ** 2 - 7.7])
        return f, g, np.empty(0)

    def sampler(count, seed):
        # Pareto set: {x1 = x2, x1 in [0,3]} union {x1 in [3,5], x2 = 3}.
        t = np.linspace(0.0, 5.0, count)
        xs = np.where(t[:, None] <= 3.0,
                      np.column_stack([t, t]),
                      np.column_stack([t, np.full_like(t, 3.0)]))
        return np.array([evaluate(x)[0] for x in xs])

    return ProblemDefinition("bnh", 2, 2, 2, 0,
                             BoxDomain([0.0, 0.0], [5.0, 3.0]),
                             evaluate, sampler)


def tnk() -> ProblemDefinition:
    def evaluate(x):
        x1, x2 = np.asarray(x, float)
        # Two-argument arctangent; arctan2(0, 0) := 0 keeps g1 total on the box.
        g1 = x1 ** 2 + x2 ** 2 - 1.0 - 0.1 * np.cos(16.0 * np.arctan2(x1, x2))
        g2 = -(x1 - 0.5) ** 2 - (x2 - 0.5) ** 2 + 0.5
        return np.array([x1, x2]), np.array([g1, g2]), np.empty(0)

    def sampler(count, seed):
        # Boundary of the first constraint, restricted to the second one.
        # The wavy boundary contains dominated arcs, so sweep densely,
        # keep the non-dominated remainder and subsample evenly.
        from .pareto import nondominated_mask
        sweep = 4 * count
        while True:
            t = np.linspace(0.0, np.pi / 2.0, sweep)
            r = np.sqrt(1.0 + 0.1 * np.cos(16.0 * t))
            xs = np.column_stack([r * np.sin(t), r * np.cos(t)])
            keep = -(xs[:, 0] - 0.5) ** 2 - (xs[:, 1] - 0.5) ** 2 + 0.5 >= 0.0
            xs = xs[keep]
            xs = xs[nondominated_mask(xs)]
            if xs.shape[0] >= count:
                idx = np.linspace(0, xs.shape[0] - 1, count).round().astype(int)
                return xs[idx]
            sweep *= 2

    return ProblemDefinition("tnk", 2, 2, 2, 0,
                             BoxDomain([0.0, 0.0], [np.pi, np.pi]),
                             evaluate, sampler)


def osy() -> ProblemDefinition:
    def evaluate(x):
        x1, x2, x3, x4, x5, x6 = np.asarray(x, float)
        f1 = -(25 * (x1 - 2) ** 2 + (x2 - 2) ** 2 + (x3 - 1) ** 2
               + (x4 - 4) ** 2 + (x5 - 1) ** 2)
        f2 = x1 ** 2 + x2 ** 2 + x3 ** 2 + x4 ** 2 + x5 ** 2 + x6 ** 2
        g = np.array([
            x1 + x2 - 2.0,
            6.0 - x1 - x2,
            2.0 - x2 + x1,
            2.0 - x1 + 3.0 * x2,
            4.0 - (x3 - 3.0) ** 2 - x4,
            (x5 - 3.0) ** 2 + x6 - 4.0,
        ])
        return np.array([f1, f2]), g, np.empty(0)

    def sampler(count, seed):
        # Five analytic Pareto-set branches, sampled evenly.
        per = max(count // 5, 2)
        xs = []
        t = np.linspace(1.0, 5.0, per)
        xs.append(np.column_stack([np.full(per, 5.0), np.ones(per), t,
                                   np.zeros(per), np.full(per, 5.0), np.zeros(per)]))
        xs.append(np.column_stack([np.full(per, 5.0), np.ones(per), t,
                                   np.zeros(per), np.ones(per), np.zeros(per)]))
        t = np.linspace(4.065, 5.0, per)
        xs.append(np.column_stack([t, (t - 2.0) / 3.0, np.ones(per),
                                   np.zeros(per), np.ones(per), np.zeros(per)]))
        t = np.linspace(1.0, 1.3732, per)
        xs.append(np.column_stack([np.zeros(per), np.full(per, 2.0), t,
                                   np.zeros(per), np.ones(per), np.zeros(per)]))
        t = np.linspace(0.0, 1.0, per)
        xs.append(np.column_stack([t, 2.0 - t, np.ones(per),
                                   np.zeros(per), np.ones(per), np.zeros(per)]))
        pts = np.array([evaluate(x)[0] for x in np.vstack(xs)])
        # Branch endpoints overlap slightly; keep the non-dominated subset.
        from .pareto import nondominated_mask
        return pts[nondominated_mask(pts)]

    return ProblemDefinition("osy", 6, 2, 6, 0,
                             BoxDomain([0, 0, 1, 0, 1, 0],
                                       [10, 10, 5, 6, 5, 10]),
                             evaluate, sampler)


BENCHMARKS = {
    "zdt1": lambda d=2: zdt(1, d),
    "zdt2": lambda d=2: zdt(2, d),
    "zdt3": lambda d=2: zdt(3, d),
    "bnh": lambda d=2: bnh(),
    "tnk": lambda d=2: tnk(),
    "osy": lambda d=6: osy(),
}


def by_name(name: str, d: int | None = None) -> ProblemDefinition:
    key = name.lower()
    if key not in BENCHMARKS:
        raise KeyError(f"unknown benchmark {name!r}; known: {sorted(BENCHMARKS)}")
    return BENCHMARKS[key]() if d is None else BENCHMARKS[key](d)


class EvaluatorError(RuntimeError):
    """The external evaluator process misbehaved (death, timeout, bad line)."""


class ExternalEvaluator:
    """Client for a line-protocol black-box evaluator subprocess.

    Startup handshake from the evaluator: ``d,n,p,m``.  Each request is one
    CSV line of d inputs at 17 significant digits; each response is one CSV
    line of n+p+m outputs.  One request in flight at a time.
    """

    def __init__(self, command, timeout: float = 60.0):
        self.command = command
        self.timeout = timeout
        self.proc = subprocess.Popen(
            command, shell=isinstance(command, str),
            stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            text=True, bufsize=1)
        line = self._read_line("handshake")
        try:
            self.d, self.n, self.p, self.m = (int(v) for v in line.split(","))
        except ValueError as exc:
            raise EvaluatorError(f"malformed handshake line {line!r}") from exc

    def _read_line(self, context: str) -> str:
        sel = selectors.DefaultSelector()
        sel.register(self.proc.stdout, selectors.EVENT_READ)
        ready = sel.select(self.timeout)
        sel.close()
        if not ready:
            raise EvaluatorError(f"evaluator timed out waiting for {context}")
        line = self.proc.stdout.readline()
        if line == "":
            raise EvaluatorError(f"evaluator exited while waiting for {context}")
        return line.strip()

    def __call__(self, x) -> EvalResult:
        x = np.asarray(x, float)
        if x.size != self.d:
            raise EvaluatorError(f"request arity {x.size} != evaluator d={self.d}")
        request = ",".join(f"{v:.17g}" for v in x)
        try:
            self.proc.stdin.write(request + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise EvaluatorError(f"evaluator died on request {request!r}") from exc
        try:
            line = self._read_line(f"response to {request!r}")
        except EvaluatorError as exc:
            raise EvaluatorError(f"{exc} (request {request!r})") from exc
        try:
            values = np.array([float(v) for v in line.split(",")])
        except ValueError as exc:
            raise EvaluatorError(f"malformed response line {line!r}") from exc
        expected = self.n + self.p + self.m
        if values.size != expected:
            raise EvaluatorError(
                f"arity mismatch: expected {expected} outputs, got {values.size}")
        return (values[:self.n],
                values[self.n:self.n + self.p],
                values[self.n + self.p:])

    def close(self):
        if self.proc.poll() is None:
            self.proc.terminate()
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()


def external_problem(command, lower, upper, name: str = "external",
                     timeout: float = 60.0) -> ProblemDefinition:
    """Wrap an external evaluator process as a ProblemDefinition.

    The protocol handshake only carries output arities, so variable bounds
    must be supplied by the caller.
    """
    client = ExternalEvaluator(command, timeout=timeout)
    domain = BoxDomain(lower, upper)
    if domain.d != client.d:
        raise EvaluatorError(
            f"bounds dimension {domain.d} != evaluator d={client.d}")
    return ProblemDefinition(name, client.d, client.n, client.p, client.m,
                             domain, client)
