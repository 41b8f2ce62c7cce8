"""Design of experiments: box domains, Latin hypercube sampling and the
evaluated-data container shared by the rest of the toolkit."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

#: Relative (per normalized axis) distance below which two points are
#: considered duplicates.  Duplicate rows make GP covariance matrices
#: singular, so they are rejected at append time.
DUPLICATE_TOL = 1e-10


class DegenerateDomainError(ValueError):
    """Raised when lower >= upper on some axis."""


class DuplicatePointError(ValueError):
    """Raised when appending a point already present in the dataset."""


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box of design variables."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        up = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != up.shape or lo.ndim != 1 or lo.size < 1:
            raise ValueError("lower and upper must be 1-D vectors of equal length")
        if not np.all(lo < up):
            raise DegenerateDomainError("every lower bound must be < upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def d(self) -> int:
        return self.lower.size

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, x, atol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - atol) and np.all(x <= self.upper + atol))

    def normalize(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.lower) / self.span

    def denormalize(self, u) -> np.ndarray:
        return self.lower + np.asarray(u, dtype=float) * self.span

    def clip(self, x) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)


def initial_doe_size(d: int, c: int) -> int:
    """Initial sample size as a function of dimension d and constraint count c."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if c < 0:
        raise ValueError("c must be >= 0")
    return 2 * d + 2 * c + 1


def lhs_sample(domain: BoxDomain, count: int, seed: int) -> np.ndarray:
    """Centered-perturbed Latin hypercube sample of `count` points.

    Each axis gets a random permutation of the `count` equal-width strata
    with a uniform jitter inside each stratum, so every axis projection has
    exactly one point per stratum.  Deterministic for a fixed seed.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    d = domain.d
    unit = np.empty((count, d))
    for j in range(d):
        perm = rng.permutation(count)
        unit[:, j] = (perm + rng.uniform(size=count)) / count
    return domain.denormalize(unit)


def _normalized_min_distance(points: np.ndarray, x: np.ndarray, domain: BoxDomain) -> float:
    """Smallest inf-norm distance from x to any row, on normalized axes."""
    if points.shape[0] == 0:
        return np.inf
    diff = np.abs(domain.normalize(points) - domain.normalize(x)[None, :])
    return float(np.min(np.max(diff, axis=1)))


def is_duplicate(points: np.ndarray, x, domain: BoxDomain, tol: float = DUPLICATE_TOL) -> bool:
    return _normalized_min_distance(np.asarray(points, float), np.asarray(x, float), domain) < tol


@dataclass(frozen=True)
class Dataset:
    """Evaluated design points with objective and constraint values.

    Immutable: `append` returns a new Dataset.
    """

    domain: BoxDomain
    points: np.ndarray = field(default=None)       # (l, d)
    objectives: np.ndarray = field(default=None)   # (l, n)
    ineq_constraints: np.ndarray = field(default=None)  # (l, p)
    eq_constraints: np.ndarray = field(default=None)    # (l, m)

    def __post_init__(self):
        for name in ("points", "objectives", "ineq_constraints", "eq_constraints"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 2:
                raise ValueError(f"{name} must be a 2-D array, got shape {arr.shape}")
            object.__setattr__(self, name, arr)
        l = self.points.shape[0]
        if not (self.objectives.shape[0] == self.ineq_constraints.shape[0]
                == self.eq_constraints.shape[0] == l):
            raise ValueError("all blocks must have the same number of rows")
        if self.points.shape[1] != self.domain.d:
            raise ValueError("point dimension does not match the domain")
        for i in range(l):
            if not self.domain.contains(self.points[i], atol=1e-12):
                raise ValueError(f"point {i} lies outside the domain")

    @staticmethod
    def empty(domain: BoxDomain, n: int, p: int = 0, m: int = 0) -> "Dataset":
        d = domain.d
        return Dataset(domain, np.empty((0, d)), np.empty((0, n)),
                       np.empty((0, p)), np.empty((0, m)))

    @property
    def l(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def n(self) -> int:
        return self.objectives.shape[1]

    @property
    def p(self) -> int:
        return self.ineq_constraints.shape[1]

    @property
    def m(self) -> int:
        return self.eq_constraints.shape[1]

    def append(self, point, f, g=None, h=None) -> "Dataset":
        point = np.atleast_1d(np.asarray(point, dtype=float))
        f = np.atleast_1d(np.asarray(f, dtype=float))
        g = np.atleast_1d(np.asarray(g, dtype=float)) if g is not None else np.empty(0)
        h = np.atleast_1d(np.asarray(h, dtype=float)) if h is not None else np.empty(0)
        if not self.domain.contains(point, atol=1e-12):
            raise ValueError("point lies outside the domain")
        if (f.size, g.size, h.size) != (self.n, self.p, self.m):
            raise ValueError("output arity does not match the dataset")
        if is_duplicate(self.points, point, self.domain):
            raise DuplicatePointError(f"point {point} duplicates an existing row")
        return Dataset(
            self.domain,
            np.vstack([self.points, point[None, :]]),
            np.vstack([self.objectives, f[None, :]]),
            np.vstack([self.ineq_constraints, g[None, :]]),
            np.vstack([self.eq_constraints, h[None, :]]),
        )

    # --- CSV round trip (17 significant digits, bit exact for float64) ---

    def header(self) -> list[str]:
        return ([f"x{i+1}" for i in range(self.d)]
                + [f"f{i+1}" for i in range(self.n)]
                + [f"g{i+1}" for i in range(self.p)]
                + [f"h{i+1}" for i in range(self.m)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.header()) + "\n")
        blocks = np.hstack([self.points, self.objectives,
                            self.ineq_constraints, self.eq_constraints])
        for row in blocks:
            buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str, domain: BoxDomain) -> "Dataset":
        lines = [ln for ln in text.strip().splitlines() if ln]
        header = lines[0].split(",")
        d = sum(1 for c in header if c.startswith("x"))
        n = sum(1 for c in header if c.startswith("f"))
        p = sum(1 for c in header if c.startswith("g"))
        m = sum(1 for c in header if c.startswith("h"))
        rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        rows = rows.reshape(len(lines) - 1, d + n + p + m)
        return Dataset(domain, rows[:, :d], rows[:, d:d + n],
                       rows[:, d + n:d + n + p], rows[:, d + n + p:])
