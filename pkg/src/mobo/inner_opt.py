"""Multi-start derivative-free maximization of an acquisition function
over the surrogate feasible domain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import acquisition as acq
from .doe import BoxDomain, DUPLICATE_TOL, is_duplicate, lhs_sample

#: Starts are generated in fixed-size LHS blocks so that requesting more
#: starts strictly extends the start list (running-best monotonicity).
START_BLOCK = 20

#: Penalty offset keeping every infeasible merit below any feasible one.
_INFEASIBLE_OFFSET = 1e12


@dataclass(frozen=True)
class InnerOptConfig:
    starts: int = 20
    evals_per_start: int = 200
    seed: int = 0


def _start_points(domain: BoxDomain, count: int, seed: int) -> np.ndarray:
    blocks = []
    got = 0
    block_index = 0
    while got < count:
        take = min(START_BLOCK, count - got)
        block_seed = int(np.random.SeedSequence((seed, block_index)).generate_state(1)[0])
        blocks.append(lhs_sample(domain, START_BLOCK, block_seed)[:take])
        got += take
        block_index += 1
    return np.vstack(blocks)


def maximize_acquisition(ctx, domain: BoxDomain, config: InnerOptConfig = InnerOptConfig(),
                         objective=None):
    """Best feasible maximizer found by multi-start Nelder-Mead refinement.

    `objective(ctx, x)` defaults to raw PI; the driver passes raw or
    regularized criteria (and the feasibility bootstrap) through it.
    Returns (x_star, alpha_star, feasible).  When no evaluated point is
    surrogate-feasible, returns the minimizer of the total constraint
    violation with feasible=False.
    """
    if objective is None:
        objective = acq.pi

    best_feas_x, best_feas_val = None, -np.inf
    best_viol_x, best_viol = None, np.inf

    def merit(x):
        nonlocal best_feas_x, best_feas_val, best_viol_x, best_viol
        x = domain.clip(x)
        if acq.feasibility(ctx, x):
            val = objective(ctx, x)
            if val > best_feas_val:
                best_feas_val, best_feas_x = val, x.copy()
            return -val
        v = acq.constraint_violation(ctx, x)
        if v < best_viol:
            best_viol, best_viol_x = v, x.copy()
        return _INFEASIBLE_OFFSET * (1.0 + v)

    for x0 in _start_points(domain, config.starts, config.seed):
        merit(x0)
        minimize(merit, x0, method="Nelder-Mead",
                 options={"maxfev": config.evals_per_start,
                          "xatol": 1e-8, "fatol": 1e-12})

    if best_feas_x is not None:
        return best_feas_x, float(best_feas_val), True
    return best_viol_x, float(-_INFEASIBLE_OFFSET * (1.0 + best_viol)), False


def dedupe_or_perturb(x_star, dataset, domain: BoxDomain, seed: int = 0) -> np.ndarray:
    """Nudge a candidate away from an existing dataset row.

    Moves along a random unit direction at normalized radius 1e-3, clipped
    to the domain; retries with fresh directions if the clipped point is
    still a duplicate.
    """
    x_star = np.asarray(x_star, float)
    if not is_duplicate(dataset.points, x_star, domain):
        return x_star
    rng = np.random.default_rng(seed)
    u = domain.normalize(x_star)
    for _ in range(100):
        direction = rng.normal(size=domain.d)
        norm = np.linalg.norm(direction)
        if norm < 1e-12:
            continue
        candidate = domain.denormalize(np.clip(u + 1e-3 * direction / norm, 0.0, 1.0))
        if not is_duplicate(dataset.points, candidate, domain, tol=DUPLICATE_TOL):
            return candidate
    raise RuntimeError("could not perturb the candidate away from existing rows")
