"""Pareto dominance machinery, 2-D hypervolume and the IGD+ indicator."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np


class EmptySetError(ValueError):
    """An indicator was asked to score an empty set."""


class PointBeyondReferenceError(ValueError):
    """A front member does not strictly dominate the reference point."""


class UnknownProblemError(ValueError):
    """No analytic Pareto front is available for this problem."""


def dominates(a, b) -> bool:
    """True iff a is componentwise <= b and a != b (minimization)."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if a.shape != b.shape:
        raise ValueError("vectors must have equal length")
    return bool(np.all(a <= b) and np.any(a < b))


def nondominated_mask(points: np.ndarray) -> np.ndarray:
    """Boolean mask of the non-dominated rows.  Duplicates keep one copy.

    Bi-objective inputs use a sort-and-sweep; higher dimensions fall back
    to a pairwise scan.
    """
    pts = np.asarray(points, float)
    npts = pts.shape[0]
    if npts == 0:
        return np.zeros(0, dtype=bool)
    mask = np.zeros(npts, dtype=bool)
    _, first = np.unique(pts, axis=0, return_index=True)
    unique_idx = np.sort(first)
    upts = pts[unique_idx]
    if pts.shape[1] == 2:
        order = np.lexsort((upts[:, 1], upts[:, 0]))
        best_f2 = np.inf
        keep = []
        for i in order:
            if upts[i, 1] < best_f2:
                keep.append(i)
                best_f2 = upts[i, 1]
        mask[unique_idx[np.asarray(keep, dtype=int)]] = True
    else:
        for i in range(len(upts)):
            if not any(dominates(upts[j], upts[i]) for j in range(len(upts)) if j != i):
                mask[unique_idx[i]] = True
    return mask


@dataclass(frozen=True)
class ParetoArchive:
    """Mutually non-dominated objective vectors, with optional design points."""

    objectives: np.ndarray                 # (k, n)
    design_points: np.ndarray | None = None  # (k, d)

    def __post_init__(self):
        obj = np.asarray(self.objectives, float)
        object.__setattr__(self, "objectives", obj)
        if self.design_points is not None:
            object.__setattr__(self, "design_points",
                               np.asarray(self.design_points, float))

    @property
    def size(self) -> int:
        return self.objectives.shape[0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        n = self.objectives.shape[1]
        buf.write(",".join(f"f{i+1}" for i in range(n)) + "\n")
        for row in self.objectives:
            buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
        return buf.getvalue()


def nondominated_filter(points, design_points=None) -> ParetoArchive:
    """Archive of the non-dominated rows of `points`."""
    pts = np.asarray(points, float)
    if pts.size == 0:
        n = pts.shape[1] if pts.ndim == 2 else 2
        return ParetoArchive(np.empty((0, n)))
    mask = nondominated_mask(pts)
    dp = None if design_points is None else np.asarray(design_points, float)[mask]
    return ParetoArchive(pts[mask], dp)


@dataclass(frozen=True)
class ReferenceFront:
    """Sampled points of an analytic optimal Pareto front."""

    points: np.ndarray  # (|Z|, n), mutually non-dominated

    def __post_init__(self):
        pts = np.asarray(self.points, float)
        if pts.shape[0] < 1:
            raise EmptySetError("reference front must contain at least one point")
        object.__setattr__(self, "points", pts)


def igd_plus(attained, reference) -> float:
    """Inverted generational distance plus of an attained set vs a reference.

    Mean over reference points of the dominance-clamped Euclidean distance
    to the nearest attained point; weakly Pareto compliant.
    """
    a = np.asarray(attained, float)
    z = reference.points if isinstance(reference, ReferenceFront) else np.asarray(reference, float)
    if a.size == 0 or z.size == 0:
        raise EmptySetError("igd_plus requires non-empty attained and reference sets")
    a = np.atleast_2d(a)
    z = np.atleast_2d(z)
    # d+(z) = || max(a - z, 0) || minimized over attained points a.
    diff = np.maximum(a[None, :, :] - z[:, None, :], 0.0)
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    return float(np.mean(np.min(dist, axis=1)))


def hypervolume(front, ref_point) -> float:
    """Area dominated by a bi-objective front and bounded by ref_point."""
    pts = np.atleast_2d(np.asarray(front, float))
    ref = np.asarray(ref_point, float)
    if pts.shape[1] != 2 or ref.shape != (2,):
        raise ValueError("hypervolume supports the bi-objective case only")
    if pts.shape[0] == 0:
        return 0.0
    for a in pts:
        if not (np.all(a < ref)):
            raise PointBeyondReferenceError(
                f"front member {a} does not strictly dominate the reference {ref}")
    pts = pts[nondominated_mask(pts)]
    order = np.argsort(pts[:, 0])
    pts = pts[order]
    # Staircase sweep: f1 ascending, f2 strictly descending after filtering.
    hv = 0.0
    for i in range(len(pts)):
        right = pts[i + 1, 0] if i + 1 < len(pts) else ref[0]
        hv += (right - pts[i, 0]) * (ref[1] - pts[i, 1])
    return float(hv)


def reference_front(problem, count: int, seed: int = 0) -> ReferenceFront:
    """Sample the analytic Pareto front of a benchmark problem.

    `count` parameter values are drawn from the documented Pareto-set
    parameterization and mapped through the true objectives; the output
    is non-dominated-filtered (and may therefore contain fewer points).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    sampler = getattr(problem, "pareto_sampler", None)
    if sampler is None:
        raise UnknownProblemError(
            f"no analytic Pareto front for problem {getattr(problem, 'name', problem)!r}")
    raw = np.asarray(sampler(count, seed), float)
    pts = raw[nondominated_mask(raw)]
    return ReferenceFront(pts)
