"""End-to-end optimization loop, the multi-seed experiment protocol and
result persistence."""

from __future__ import annotations

import json
import os
import tempfile
import time
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import acquisition as acq
from .acquisition import AcquisitionContext, AcquisitionKind, acquisition_value
from .doe import BoxDomain, Dataset, initial_doe_size, lhs_sample
from .inner_opt import InnerOptConfig, dedupe_or_perturb, maximize_acquisition
from .nsga2 import Nsga2Config, run_nsga2
from .pareto import (ParetoArchive, ReferenceFront, UnknownProblemError,
                     igd_plus, nondominated_filter, reference_front)
from .problems import ProblemDefinition
from .surrogate import GpConfig, fit_bundle

REFERENCE_FRONT_SIZE = 1000


@dataclass(frozen=True)
class RunConfig:
    kind: AcquisitionKind = AcquisitionKind()
    total_budget: int | None = None      # defaults to 20 d
    doe_size: int | None = None          # defaults to 2d + 2c + 1
    repetitions: int = 10
    seeds: tuple[int, ...] | None = None
    eq_tolerance: float = 1e-4
    kappa: float = 0.0
    gp: GpConfig = GpConfig()
    inner: InnerOptConfig = InnerOptConfig()
    final_front: Nsga2Config = Nsga2Config()

    def resolve(self, problem: ProblemDefinition) -> tuple[int, int]:
        doe = self.doe_size if self.doe_size is not None else \
            initial_doe_size(problem.d, problem.constraint_count)
        budget = self.total_budget if self.total_budget is not None else 20 * problem.d
        if budget <= doe:
            raise ValueError(f"total budget {budget} must exceed the DoE size {doe}")
        return budget, doe


@dataclass
class IterationRow:
    iteration: int
    point: np.ndarray
    f: np.ndarray
    g: np.ndarray
    h: np.ndarray
    feasible: bool
    alpha: float
    gamma: float
    igd_plus: float
    wall_time: float


@dataclass
class RunRecord:
    problem: str
    seed: int
    config: dict
    dataset: Dataset
    rows: list[IterationRow]
    final_front: ParetoArchive | None
    completed: bool
    error: str | None = None

    @property
    def igd_trace(self) -> np.ndarray:
        return np.array([row.igd_plus for row in self.rows])


def _derived_seed(*keys) -> int:
    return int(np.random.SeedSequence(tuple(int(k) for k in keys)).generate_state(1)[0])


def _feasible_mask(dataset: Dataset, eq_tolerance: float) -> np.ndarray:
    ok = np.ones(dataset.l, dtype=bool)
    if dataset.p:
        ok &= np.all(dataset.ineq_constraints >= 0.0, axis=1)
    if dataset.m:
        ok &= np.all(np.abs(dataset.eq_constraints) <= eq_tolerance, axis=1)
    return ok


def evaluated_archive(dataset: Dataset, eq_tolerance: float) -> ParetoArchive:
    """Feasible non-dominated subset of the evaluated objective vectors."""
    mask = _feasible_mask(dataset, eq_tolerance)
    return nondominated_filter(dataset.objectives[mask], dataset.points[mask])


def _trace_value(dataset, eq_tolerance, reference):
    if reference is None:
        return np.nan
    archive = evaluated_archive(dataset, eq_tolerance)
    if archive.size == 0:
        return np.nan
    return igd_plus(archive.objectives, reference)


def _load_reference(problem) -> ReferenceFront | None:
    try:
        return reference_front(problem, REFERENCE_FRONT_SIZE)
    except UnknownProblemError:
        return None


def run_bo(problem: ProblemDefinition, config: RunConfig, seed: int,
           reference: ReferenceFront | None = None) -> RunRecord:
    """One optimization run: LHS DoE, iterative enrichment, final front.

    Deterministic for a fixed (config, seed); per-iteration RNG streams are
    index-derived.  A surrogate or evaluator failure aborts the run with a
    partial record flagged incomplete.
    """
    budget, doe_size = config.resolve(problem)
    if reference is None:
        reference = _load_reference(problem)
    snapshot = {
        "problem": problem.name, "seed": seed,
        "criterion": config.kind.criterion,
        "regularization": config.kind.regularization,
        "beta": config.kind.beta,
        "total_budget": budget, "doe_size": doe_size,
        "eq_tolerance": config.eq_tolerance, "kappa": config.kappa,
        "gp_kernel": config.gp.kernel, "gp_restarts": config.gp.restarts,
        "inner_starts": config.inner.starts,
        "inner_evals": config.inner.evals_per_start,
        "final_front_population": config.final_front.population,
        "final_front_generations": config.final_front.generations,
    }

    dataset = Dataset.empty(problem.domain, problem.n, problem.p, problem.m)
    for x in lhs_sample(problem.domain, doe_size, seed):
        f, g, h = problem.evaluate(x)
        dataset = dataset.append(x, f, g, h)

    rows: list[IterationRow] = []
    try:
        for it in range(budget - doe_size):
            t0 = time.perf_counter()
            gp_cfg = replace(config.gp, seed=_derived_seed(seed, it, 0))
            bundle = fit_bundle(dataset, gp_cfg)
            archive = evaluated_archive(dataset, config.eq_tolerance)
            inner_cfg = replace(config.inner, seed=_derived_seed(seed, it, 1))
            gamma = 1.0

            if archive.size == 0:
                # No feasible point yet: hunt for feasibility before trading
                # off objectives.
                ctx = AcquisitionContext(bundle, archive, None, 1.0,
                                         config.eq_tolerance, config.kappa)
                x_star, alpha, _ = maximize_acquisition(
                    ctx, problem.domain, inner_cfg,
                    objective=lambda c, x: acq.feasibility_probability(c, x))
            else:
                ref_point = None
                if config.kind.criterion == "ehvi":
                    mask = _feasible_mask(dataset, config.eq_tolerance)
                    ref_point = acq.ehvi_reference_point(dataset.objectives[mask])
                ctx = AcquisitionContext(bundle, archive, ref_point, 1.0,
                                         config.eq_tolerance, config.kappa)
                raw = lambda c, x: acquisition_value(c, config.kind, x)  # noqa: E731
                x_star, alpha, feas = maximize_acquisition(
                    ctx, problem.domain, inner_cfg, objective=raw)
                if config.kind.regularized and feas:
                    gamma = acq.estimate_gamma(ctx, x_star, alpha,
                                               config.kind.beta,
                                               config.kind.regularization)
                    ctx = replace(ctx, gamma=gamma)
                    reg = lambda c, x: acquisition_value(c, config.kind, x,  # noqa: E731
                                                         regularized=True)
                    x_star, alpha, feas = maximize_acquisition(
                        ctx, problem.domain, inner_cfg, objective=reg)

            x_new = dedupe_or_perturb(x_star, dataset, problem.domain,
                                      seed=_derived_seed(seed, it, 2))
            f, g, h = problem.evaluate(x_new)
            dataset = dataset.append(x_new, f, g, h)
            rows.append(IterationRow(
                iteration=it, point=x_new, f=f, g=g, h=h,
                feasible=problem.true_feasible(g, h, config.eq_tolerance),
                alpha=float(alpha), gamma=float(gamma),
                igd_plus=_trace_value(dataset, config.eq_tolerance, reference),
                wall_time=time.perf_counter() - t0))

        final_bundle = fit_bundle(dataset, replace(
            config.gp, seed=_derived_seed(seed, budget, 0)))

        def surrogate_means(x):
            mu_f, _ = final_bundle.objective_moments(x)
            mu_g, _ = final_bundle.ineq_moments(x)
            mu_h, _ = final_bundle.eq_moments(x)
            return mu_f, mu_g, mu_h

        front_cfg = replace(config.final_front, seed=_derived_seed(seed, budget, 1),
                            eq_tolerance=config.eq_tolerance)
        final_front = run_nsga2(surrogate_means, problem.domain, front_cfg)
        return RunRecord(problem.name, seed, snapshot, dataset, rows,
                         final_front, completed=True)
    except Exception as exc:  # noqa: BLE001 - partial record carries the context
        return RunRecord(problem.name, seed, snapshot, dataset, rows, None,
                         completed=False,
                         error=f"iteration {len(rows)}: {type(exc).__name__}: {exc}")


@dataclass
class ExperimentSummary:
    problem: str
    config: dict
    seeds: list[int]
    records: list[RunRecord]
    trace_mean: np.ndarray
    trace_std: np.ndarray
    final_scores: np.ndarray     # final trace value per completed run
    final_mean: float
    final_std: float


def run_experiment(problem: ProblemDefinition, config: RunConfig) -> ExperimentSummary:
    """Repeat run_bo over independent seeds and aggregate the IGD+ traces."""
    seeds = list(config.seeds) if config.seeds is not None \
        else list(range(config.repetitions))
    reference = _load_reference(problem)
    records = [run_bo(problem, config, s, reference) for s in seeds]
    completed = [r for r in records if r.completed]
    for r in records:
        if not r.completed:
            warnings.warn(f"seed {r.seed} failed: {r.error}; "
                          "summary computed over completed runs", stacklevel=2)
    if not completed:
        raise RuntimeError("no run completed; cannot summarize")
    traces = np.array([r.igd_trace for r in completed])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=RuntimeWarning)
        trace_mean = np.nanmean(traces, axis=0)
        trace_std = np.nanstd(traces, axis=0)
    finals = traces[:, -1]
    return ExperimentSummary(
        problem=problem.name, config=completed[0].config, seeds=seeds,
        records=records, trace_mean=trace_mean, trace_std=trace_std,
        final_scores=finals, final_mean=float(np.nanmean(finals)),
        final_std=float(np.nanstd(finals)))


# --- persistence -----------------------------------------------------------

def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _front_csv(front: ParetoArchive) -> str:
    return front.to_csv()


def _history_csv(record: RunRecord) -> str:
    n = record.dataset.n
    p = record.dataset.p
    m = record.dataset.m
    d = record.dataset.d
    header = (["iteration"] + [f"x{i+1}" for i in range(d)]
              + [f"f{i+1}" for i in range(n)] + [f"g{i+1}" for i in range(p)]
              + [f"h{i+1}" for i in range(m)]
              + ["feasible", "alpha", "gamma", "igd_plus", "wall_time"])
    lines = [",".join(header)]
    for row in record.rows:
        values = ([str(row.iteration)]
                  + [f"{v:.17g}" for v in row.point]
                  + [f"{v:.17g}" for v in row.f]
                  + [f"{v:.17g}" for v in row.g]
                  + [f"{v:.17g}" for v in row.h]
                  + [str(int(row.feasible)), f"{row.alpha:.17g}",
                     f"{row.gamma:.17g}", f"{row.igd_plus:.17g}",
                     f"{row.wall_time:.6f}"])
        lines.append(",".join(values))
    return "\n".join(lines) + "\n"


def export_record(record: RunRecord, out_dir: str):
    """Write a single run: evaluation history, final front and metadata."""
    os.makedirs(out_dir, exist_ok=True)
    _atomic_write(os.path.join(out_dir, "history.csv"), _history_csv(record))
    _atomic_write(os.path.join(out_dir, "doe.csv"), record.dataset.to_csv())
    if record.final_front is not None:
        _atomic_write(os.path.join(out_dir, "front.csv"), _front_csv(record.final_front))
    meta = dict(record.config)
    meta.update(completed=record.completed, error=record.error)
    _atomic_write(os.path.join(out_dir, "metadata.json"),
                  json.dumps(meta, indent=2) + "\n")


def export_summary(summary: ExperimentSummary, out_dir: str):
    """Write an experiment summary: convergence trace and metadata."""
    os.makedirs(out_dir, exist_ok=True)
    lines = ["iteration,igd_plus_mean,igd_plus_std"]
    for i, (mu, sd) in enumerate(zip(summary.trace_mean, summary.trace_std)):
        lines.append(f"{i},{mu:.17g},{sd:.17g}")
    _atomic_write(os.path.join(out_dir, "trace.csv"), "\n".join(lines) + "\n")
    meta = dict(summary.config)
    meta.update(seeds=summary.seeds,
                final_scores=[float(v) for v in summary.final_scores],
                final_mean=summary.final_mean, final_std=summary.final_std)
    _atomic_write(os.path.join(out_dir, "summary.json"),
                  json.dumps(meta, indent=2) + "\n")
    for record in summary.records:
        export_record(record, os.path.join(out_dir, f"seed_{record.seed}"))
