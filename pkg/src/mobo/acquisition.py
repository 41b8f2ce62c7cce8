"""Bi-objective infill criteria (PI, MPI, EHVI), their regularized
variants and the surrogate feasibility rules.

All criteria assume independent Gaussian marginals N(mu_j, sigma_j^2) for
the predicted objective vector at a candidate point, with the current
feasible non-dominated set as the improvement baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .pareto import ParetoArchive, dominates
from .surrogate import SurrogateBundle

#: Standard deviations below this are treated as exactly zero, with the
#: criteria degenerating to their indicator limits.
SIGMA_EPS = 1e-12

CRITERIA = ("pi", "mpi", "ehvi")
REGULARIZATIONS = ("none", "max", "sum")


class InvalidReferenceError(ValueError):
    """EHVI reference point is not strictly dominated by the whole archive."""


@dataclass(frozen=True)
class AcquisitionKind:
    criterion: str = "pi"
    regularization: str = "none"
    beta: float = 100.0

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {CRITERIA}")
        if self.regularization not in REGULARIZATIONS:
            raise ValueError(f"regularization must be one of {REGULARIZATIONS}")
        if self.beta <= 0:
            raise ValueError("beta must be positive")

    @property
    def regularized(self) -> bool:
        return self.regularization != "none"

    def label(self) -> str:
        if self.regularized:
            return f"{self.criterion}(reg={self.regularization})"
        return self.criterion


@dataclass(frozen=True)
class AcquisitionContext:
    """Everything an infill criterion needs at one BO iteration."""

    surrogates: SurrogateBundle
    archive: ParetoArchive                       # feasible non-dominated set
    ref_point: np.ndarray | None = None          # EHVI only
    gamma: float = 1.0
    eq_tolerance: float = 1e-4
    kappa: float = 0.0

    def objective_moments(self, x):
        return self.surrogates.objective_moments(x)


def _sorted_front(archive: ParetoArchive) -> np.ndarray:
    front = np.asarray(archive.objectives, float)
    return front[np.argsort(front[:, 0])]


def _cdf(b, mu, sigma):
    """P(N(mu, sigma^2) < b), degenerating to a step at sigma = 0."""
    if sigma > SIGMA_EPS:
        return float(ndtr((b - mu) / sigma))
    return 1.0 if mu < b else 0.0


def pi(ctx: AcquisitionContext, x) -> float:
    """Probability the predicted objective vector is non-dominated by the
    archive, computed exactly by the staircase decomposition (n = 2)."""
    mu, sd = ctx.objective_moments(x)
    if ctx.archive.size == 0:
        raise ValueError("PI requires a non-empty archive")
    if mu.size != 2:
        raise ValueError("PI supports the bi-objective case only")
    front = _sorted_front(ctx.archive)
    if np.all(sd <= SIGMA_EPS):
        return 0.0 if any(dominates(a, mu) or np.array_equal(a, mu) for a in front) else 1.0
    k = front.shape[0]
    p_dom = 0.0
    for i in range(k):
        right = front[i + 1, 0] if i + 1 < k else np.inf
        w = _cdf(right, mu[0], sd[0]) - _cdf(front[i, 0], mu[0], sd[0])
        p_dom += w * (1.0 - _cdf(front[i, 1], mu[1], sd[1]))
    return float(min(max(1.0 - p_dom, 0.0), 1.0))


def mpi(ctx: AcquisitionContext, x) -> float:
    """Minimum over front members of the probability of improving on them
    in at least one objective."""
    mu, sd = ctx.objective_moments(x)
    if ctx.archive.size == 0:
        raise ValueError("MPI requires a non-empty archive")
    front = ctx.archive.objectives
    best = 1.0
    for z in front:
        prod = 1.0
        for j in range(mu.size):
            if sd[j] > SIGMA_EPS:
                prod *= float(ndtr((mu[j] - z[j]) / sd[j]))
            else:
                prod *= 1.0 if mu[j] >= z[j] else 0.0
        best = min(best, 1.0 - prod)
    return float(min(max(best, 0.0), 1.0))


def _partial_expectation(b, mu, sigma):
    """Integral of P(Y < z) dz over z in (-inf, b] for Y ~ N(mu, sigma^2)."""
    if sigma > SIGMA_EPS:
        u = (b - mu) / sigma
        return float((b - mu) * ndtr(u) + sigma * np.exp(-0.5 * u * u) / np.sqrt(2.0 * np.pi))
    return float(max(b - mu, 0.0))


def ehvi(ctx: AcquisitionContext, x) -> float:
    """Expected hypervolume improvement, exact for n = 2.

    Uses E[HVI] = integral over the non-dominated region bounded by the
    reference point of P(Y1 <= z1) P(Y2 <= z2) dz, evaluated strip by
    strip on the archive staircase.
    """
    mu, sd = ctx.objective_moments(x)
    if ctx.ref_point is None:
        raise InvalidReferenceError("EHVI requires a reference point")
    ref = np.asarray(ctx.ref_point, float)
    if ctx.archive.size == 0:
        raise ValueError("EHVI requires a non-empty archive")
    front = _sorted_front(ctx.archive)
    if not np.all(front < ref[None, :]):
        raise InvalidReferenceError(
            "reference point must be strictly dominated by every archive member")
    k = front.shape[0]
    total = 0.0
    # Strip 0: z1 < a1_1, upper z2 bound is the reference.
    g_prev = _partial_expectation(front[0, 0], mu[0], sd[0])
    total += g_prev * _partial_expectation(ref[1], mu[1], sd[1])
    for i in range(k):
        right = front[i + 1, 0] if i + 1 < k else ref[0]
        g_right = _partial_expectation(right, mu[0], sd[0])
        total += (g_right - g_prev) * _partial_expectation(front[i, 1], mu[1], sd[1])
        g_prev = g_right
    return float(max(total, 0.0))


def psi(mu, kind: str) -> float:
    """Scalarization of a predicted objective vector: max or sum."""
    mu = np.asarray(mu, float)
    if kind in ("max", "reg_max"):
        return float(np.max(mu))
    if kind in ("sum", "reg_sum"):
        return float(np.sum(mu))
    raise ValueError(f"unknown scalarization {kind!r}")


def regularize(alpha_value: float, psi_value: float, gamma: float) -> float:
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return gamma * alpha_value - psi_value


def estimate_gamma(ctx: AcquisitionContext, x_max, alpha_at_max: float,
                   beta: float, kind: str) -> float:
    """Scale for the regularized criterion, from the raw-criterion maximizer.

    gamma = beta * |psi(mu(x_max))| / alpha(x_max) when the raw maximum is
    positive, 1 otherwise; floored at 1 so the maximization sense never
    flips when objectives are negative.
    """
    if alpha_at_max <= 0.0:
        return 1.0
    mu, _ = ctx.objective_moments(x_max)
    return max(1.0, beta * abs(psi(mu, kind)) / alpha_at_max)


def acquisition_value(ctx: AcquisitionContext, kind: AcquisitionKind, x,
                      regularized: bool = False) -> float:
    """Raw or regularized criterion value at x."""
    fn = {"pi": pi, "mpi": mpi, "ehvi": ehvi}[kind.criterion]
    raw = fn(ctx, x)
    if not regularized:
        return raw
    mu, _ = ctx.objective_moments(x)
    return regularize(raw, psi(mu, kind.regularization), ctx.gamma)


def feasibility(ctx: AcquisitionContext, x) -> bool:
    """Surrogate feasibility: mu_g + kappa*sigma_g >= 0 and |mu_h| <= tol."""
    mu_g, sd_g = ctx.surrogates.ineq_moments(x)
    if mu_g.size and not np.all(mu_g + ctx.kappa * sd_g >= 0.0):
        return False
    mu_h, _ = ctx.surrogates.eq_moments(x)
    if mu_h.size and not np.all(np.abs(mu_h) <= ctx.eq_tolerance):
        return False
    return True


def constraint_violation(ctx: AcquisitionContext, x) -> float:
    """Total surrogate-mean constraint violation (0 when feasible)."""
    mu_g, _ = ctx.surrogates.ineq_moments(x)
    mu_h, _ = ctx.surrogates.eq_moments(x)
    v = float(np.sum(np.maximum(-mu_g, 0.0))) if mu_g.size else 0.0
    if mu_h.size:
        v += float(np.sum(np.maximum(np.abs(mu_h) - ctx.eq_tolerance, 0.0)))
    return v


def feasibility_probability(ctx: AcquisitionContext, x) -> float:
    """Product over constraints of the probability of satisfaction.

    Used to bootstrap the search while the archive is still empty.
    """
    prob = 1.0
    mu_g, sd_g = ctx.surrogates.ineq_moments(x)
    for mu, sd in zip(mu_g, sd_g):
        prob *= float(ndtr(mu / sd)) if sd > SIGMA_EPS else (1.0 if mu >= 0 else 0.0)
    mu_h, sd_h = ctx.surrogates.eq_moments(x)
    for mu, sd in zip(mu_h, sd_h):
        if sd > SIGMA_EPS:
            prob *= float(ndtr((ctx.eq_tolerance - mu) / sd)
                          - ndtr((-ctx.eq_tolerance - mu) / sd))
        else:
            prob *= 1.0 if abs(mu) <= ctx.eq_tolerance else 0.0
    return prob


def ehvi_reference_point(feasible_objectives: np.ndarray) -> np.ndarray:
    """Componentwise maximum of the feasible points plus 10% of the range
    (at least 1e-6), recomputed each iteration."""
    pts = np.atleast_2d(np.asarray(feasible_objectives, float))
    worst = pts.max(axis=0)
    margin = np.maximum(0.1 * (worst - pts.min(axis=0)), 1e-6)
    return worst + margin
