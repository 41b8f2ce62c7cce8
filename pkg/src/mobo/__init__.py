"""Constrained multi-objective Bayesian optimization with regularized
infill criteria, plus the analytic benchmark harness."""

from .acquisition import AcquisitionContext, AcquisitionKind
from .doe import BoxDomain, Dataset, initial_doe_size, lhs_sample
from .driver import RunConfig, RunRecord, run_bo, run_experiment
from .nsga2 import Nsga2Config, run_nsga2
from .pareto import (ParetoArchive, ReferenceFront, dominates, hypervolume,
                     igd_plus, nondominated_filter, reference_front)
from .problems import ProblemDefinition, bnh, by_name, external_problem, osy, tnk, zdt
from .surrogate import GaussianProcess, GpConfig, SurrogateBundle, fit, fit_bundle

__all__ = [
    "AcquisitionContext", "AcquisitionKind", "BoxDomain", "Dataset",
    "GaussianProcess", "GpConfig", "Nsga2Config", "ParetoArchive",
    "ProblemDefinition", "ReferenceFront", "RunConfig", "RunRecord",
    "SurrogateBundle", "bnh", "by_name", "dominates", "external_problem",
    "fit", "fit_bundle", "hypervolume", "igd_plus", "initial_doe_size",
    "lhs_sample", "nondominated_filter", "osy", "reference_front", "run_bo",
    "run_experiment", "run_nsga2", "tnk", "zdt",
]

__version__ = "0.1.0"
