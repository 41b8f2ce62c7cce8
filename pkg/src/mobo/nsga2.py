"""Constrained NSGA-II: non-dominated sorting with the feasibility-first
domination rule, crowding distance, SBX crossover and polynomial mutation.

Used both as the direct baseline and to extract an approximate Pareto
front from the surrogate means at the end of a BO run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .doe import BoxDomain
from .pareto import ParetoArchive, nondominated_mask


@dataclass(frozen=True)
class Nsga2Config:
    population: int = 100
    generations: int = 50
    crossover_eta: float = 15.0
    crossover_prob: float = 0.9
    mutation_eta: float = 20.0
    mutation_prob: float | None = None  # defaults to 1/d
    seed: int = 0
    eq_tolerance: float = 1e-4

    def __post_init__(self):
        if self.population < 2 or self.population % 2 != 0:
            raise ValueError("population must be even and >= 2")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")


def constrained_dominates(f_a, v_a, f_b, v_b) -> bool:
    """Deb's feasibility-first domination rule (violations v >= 0)."""
    if v_a == 0.0 and v_b > 0.0:
        return True
    if v_a > 0.0 and v_b == 0.0:
        return False
    if v_a > 0.0 and v_b > 0.0:
        return v_a < v_b
    f_a = np.asarray(f_a, float)
    f_b = np.asarray(f_b, float)
    return bool(np.all(f_a <= f_b) and np.any(f_a < f_b))


def fast_nondominated_sort(objectives, violations) -> list[list[int]]:
    """Partition indices into fronts under constrained domination."""
    f = np.atleast_2d(np.asarray(objectives, float))
    v = np.asarray(violations, float)
    if f.shape[0] != v.shape[0]:
        raise ValueError("objectives and violations must have equal length")
    npts = f.shape[0]
    dominated_by = [[] for _ in range(npts)]
    counts = np.zeros(npts, dtype=int)
    for i in range(npts):
        for j in range(i + 1, npts):
            if constrained_dominates(f[i], v[i], f[j], v[j]):
                dominated_by[i].append(j)
                counts[j] += 1
            elif constrained_dominates(f[j], v[j], f[i], v[i]):
                dominated_by[j].append(i)
                counts[i] += 1
    fronts = []
    current = [i for i in range(npts) if counts[i] == 0]
    while current:
        fronts.append(current)
        nxt = []
        for i in current:
            for j in dominated_by[i]:
                counts[j] -= 1
                if counts[j] == 0:
                    nxt.append(j)
        current = nxt
    return fronts


def crowding_distance(objectives) -> np.ndarray:
    """Per-point crowding distance within one front (inf at boundaries)."""
    f = np.atleast_2d(np.asarray(objectives, float))
    npts, n = f.shape
    dist = np.zeros(npts)
    if npts <= 2:
        return np.full(npts, np.inf)
    for j in range(n):
        order = np.argsort(f[:, j], kind="stable")
        span = f[order[-1], j] - f[order[0], j]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        if span <= 0:
            continue
        for k in range(1, npts - 1):
            dist[order[k]] += (f[order[k + 1], j] - f[order[k - 1], j]) / span
    return dist


def _violation(g, h, eq_tolerance):
    v = float(np.sum(np.maximum(-g, 0.0))) if g.size else 0.0
    if h.size:
        v += float(np.sum(np.maximum(np.abs(h) - eq_tolerance, 0.0)))
    return v


def _sbx(parent_a, parent_b, lower, upper, eta, prob, rng):
    child_a, child_b = parent_a.copy(), parent_b.copy()
    if rng.uniform() > prob:
        return child_a, child_b
    for j in range(len(parent_a)):
        if rng.uniform() > 0.5 or abs(parent_a[j] - parent_b[j]) < 1e-14:
            continue
        y1, y2 = sorted((parent_a[j], parent_b[j]))
        u = rng.uniform()
        beta = (2.0 * u) ** (1.0 / (eta + 1.0)) if u <= 0.5 \
            else (1.0 / (2.0 * (1.0 - u))) ** (1.0 / (eta + 1.0))
        c1 = 0.5 * ((y1 + y2) - beta * (y2 - y1))
        c2 = 0.5 * ((y1 + y2) + beta * (y2 - y1))
        if rng.uniform() < 0.5:
            c1, c2 = c2, c1
        child_a[j] = np.clip(c1, lower[j], upper[j])
        child_b[j] = np.clip(c2, lower[j], upper[j])
    return child_a, child_b


def _polynomial_mutation(x, lower, upper, eta, prob, rng):
    y = x.copy()
    for j in range(len(x)):
        if rng.uniform() > prob:
            continue
        span = upper[j] - lower[j]
        u = rng.uniform()
        if u < 0.5:
            delta = (2.0 * u) ** (1.0 / (eta + 1.0)) - 1.0
        else:
            delta = 1.0 - (2.0 * (1.0 - u)) ** (1.0 / (eta + 1.0))
        y[j] = np.clip(x[j] + delta * span, lower[j], upper[j])
    return y


def _rank_and_crowding(objectives, violations):
    fronts = fast_nondominated_sort(objectives, violations)
    rank = np.empty(len(violations), dtype=int)
    crowd = np.empty(len(violations))
    for r, front in enumerate(fronts):
        rank[front] = r
        crowd[front] = crowding_distance(objectives[front])
    return fronts, rank, crowd


def run_nsga2(evaluate, domain: BoxDomain, config: Nsga2Config = Nsga2Config()) -> ParetoArchive:
    """Elitist (mu+lambda) NSGA-II; returns the feasible non-dominated set
    of the final population (all points when none is feasible)."""
    rng = np.random.default_rng(config.seed)
    d = domain.d
    p_mut = config.mutation_prob if config.mutation_prob is not None else 1.0 / d
    pop_x = domain.lower + rng.uniform(size=(config.population, d)) * domain.span

    def evaluate_all(xs):
        fs, vs = [], []
        for x in xs:
            f, g, h = evaluate(x)
            fs.append(np.asarray(f, float))
            vs.append(_violation(np.asarray(g, float), np.asarray(h, float),
                                 config.eq_tolerance))
        return np.array(fs), np.array(vs)

    pop_f, pop_v = evaluate_all(pop_x)
    _, rank, crowd = _rank_and_crowding(pop_f, pop_v)

    def tournament():
        i, j = rng.integers(config.population, size=2)
        if rank[i] < rank[j]:
            return i
        if rank[j] < rank[i]:
            return j
        return i if crowd[i] >= crowd[j] else j

    for _ in range(config.generations):
        offspring = []
        while len(offspring) < config.population:
            pa, pb = pop_x[tournament()], pop_x[tournament()]
            ca, cb = _sbx(pa, pb, domain.lower, domain.upper,
                          config.crossover_eta, config.crossover_prob, rng)
            offspring.append(_polynomial_mutation(ca, domain.lower, domain.upper,
                                                  config.mutation_eta, p_mut, rng))
            if len(offspring) < config.population:
                offspring.append(_polynomial_mutation(cb, domain.lower, domain.upper,
                                                      config.mutation_eta, p_mut, rng))
        off_x = np.array(offspring)
        off_f, off_v = evaluate_all(off_x)
        all_x = np.vstack([pop_x, off_x])
        all_f = np.vstack([pop_f, off_f])
        all_v = np.concatenate([pop_v, off_v])
        fronts, _, _ = _rank_and_crowding(all_f, all_v)
        chosen = []
        for front in fronts:
            if len(chosen) + len(front) <= config.population:
                chosen.extend(front)
            else:
                cd = crowding_distance(all_f[front])
                order = np.argsort(-cd, kind="stable")
                need = config.population - len(chosen)
                chosen.extend(np.asarray(front)[order[:need]].tolist())
                break
        chosen = np.asarray(chosen)
        pop_x, pop_f, pop_v = all_x[chosen], all_f[chosen], all_v[chosen]
        _, rank, crowd = _rank_and_crowding(pop_f, pop_v)

    feasible = pop_v == 0.0
    if np.any(feasible):
        cand_x, cand_f = pop_x[feasible], pop_f[feasible]
    else:
        cand_x, cand_f = pop_x, pop_f
    mask = nondominated_mask(cand_f)
    return ParetoArchive(cand_f[mask], cand_x[mask])
