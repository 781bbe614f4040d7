"""Finite metric spaces, probability distributions on them, and exact Wasserstein distance.

All distances are plain nonnegative floats.  Spaces and distributions are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

MASS_TOL = 1e-12
METRIC_TOL = 1e-12


class InvalidMetricError(ValueError):
    """Raised when a distance matrix violates the metric axioms."""


class InvalidDistributionError(ValueError):
    """Raised when a probability vector or tensor is malformed."""


@dataclass(frozen=True)
class FiniteMetricSpace:
    """A finite set of labelled points with a validated distance matrix.

    labels: point identifiers (strings).
    dist:   symmetric matrix, zero diagonal, positive off-diagonal,
            triangle inequality within METRIC_TOL.
    """

    labels: tuple
    dist: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        object.__setattr__(self, "labels", labels)
        d = np.asarray(self.dist, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise InvalidMetricError(f"distance matrix must be square, got shape {d.shape}")
        if d.shape[0] != len(labels):
            raise InvalidMetricError(
                f"matrix size {d.shape[0]} does not match {len(labels)} labels")
        if len(set(labels)) != len(labels):
            raise InvalidMetricError("duplicate labels")
        _validate_metric(d)
        d = d.copy()
        d.flags.writeable = False
        object.__setattr__(self, "dist", d)

    @property
    def size(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return self.size

    def diameter(self) -> float:
        return float(self.dist.max()) if self.size > 1 else 0.0

    def min_positive_distance(self) -> float:
        if self.size < 2:
            return 0.0
        off = self.dist[~np.eye(self.size, dtype=bool)]
        return float(off.min())

    def scaled(self, c: float) -> "FiniteMetricSpace":
        """Same points with all distances multiplied by c > 0."""
        if c <= 0:
            raise InvalidMetricError("scale factor must be positive")
        return FiniteMetricSpace(self.labels, self.dist * c)

    def is_ultrametric(self, tol: float = 1e-12) -> bool:
        """Strong triangle inequality d(i,k) <= max(d(i,j), d(j,k)) on all triples."""
        d = self.dist
        for j in range(self.size):
            bound = np.maximum(d[:, j][:, None], d[j, :][None, :])
            if (d > bound + tol).any():
                return False
        return True

    def to_json_dict(self) -> dict:
        return {"labels": list(self.labels), "dist": self.dist.tolist()}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "FiniteMetricSpace":
        return cls(tuple(doc["labels"]), np.asarray(doc["dist"], dtype=float))


def _validate_metric(d: np.ndarray) -> None:
    n = d.shape[0]
    if not np.isfinite(d).all():
        raise InvalidMetricError("non-finite distance entry")
    bad = np.argwhere(d < 0)
    if bad.size:
        i, j = bad[0]
        raise InvalidMetricError(f"negative distance at ({i},{j})")
    diag = np.abs(np.diag(d))
    if (diag > METRIC_TOL).any():
        i = int(np.argmax(diag))
        raise InvalidMetricError(f"nonzero diagonal at ({i},{i})")
    asym = np.abs(d - d.T)
    if (asym > METRIC_TOL).any():
        i, j = np.unravel_index(int(np.argmax(asym)), d.shape)
        raise InvalidMetricError(f"asymmetric at ({i},{j}): {d[i, j]} vs {d[j, i]}")
    off = d + np.eye(n)  # mask the diagonal when checking positivity
    bad = np.argwhere(off <= 0)
    if bad.size:
        i, j = bad[0]
        raise InvalidMetricError(f"zero off-diagonal distance at ({i},{j})")
    # Triangle inequality, vectorized one pivot at a time so large spaces stay cheap.
    for j in range(n):
        slack = d - (d[:, j][:, None] + d[j, :][None, :])
        if (slack > METRIC_TOL).any():
            i, k = np.unravel_index(int(np.argmax(slack)), d.shape)
            raise InvalidMetricError(f"triangle violated at ({i},{j},{k})")


def new_space(labels, dist) -> FiniteMetricSpace:
    """Construct and validate a finite metric space."""
    return FiniteMetricSpace(tuple(labels), np.asarray(dist, dtype=float))


def discrete_space(k: int, prefix: str = "a") -> FiniteMetricSpace:
    """k points at pairwise distance 1."""
    d = 1.0 - np.eye(k)
    return FiniteMetricSpace(tuple(f"{prefix}{i}" for i in range(k)), d)


def grid_space(q: int) -> FiniteMetricSpace:
    """q evenly spaced points of [0,1) with distance |i-j|/q."""
    idx = np.arange(q, dtype=float)
    d = np.abs(idx[:, None] - idx[None, :]) / q
    return FiniteMetricSpace(tuple(f"g{i}" for i in range(q)), d)


@dataclass(frozen=True)
class Distribution:
    """Probability vector indexed by the points of a space."""

    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1:
            raise InvalidDistributionError(f"probability vector must be 1-D, got {p.ndim}-D")
        if (p < -1e-15).any():
            i = int(np.argmin(p))
            raise InvalidDistributionError(f"negative probability {p[i]} at index {i}")
        p = np.clip(p, 0.0, None)
        if abs(p.sum() - 1.0) > MASS_TOL:
            raise InvalidDistributionError(f"total mass {p.sum()} not within {MASS_TOL} of 1")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @property
    def size(self) -> int:
        return self.probs.shape[0]

    def support(self) -> np.ndarray:
        return np.nonzero(self.probs > 0)[0]

    @classmethod
    def uniform(cls, n: int) -> "Distribution":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, n: int, i: int) -> "Distribution":
        p = np.zeros(n)
        p[i] = 1.0
        return cls(p)


@dataclass(frozen=True)
class JointDistribution:
    """Joint probability tensor over two or three finite axes."""

    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim not in (2, 3):
            raise InvalidDistributionError(f"joint must have 2 or 3 axes, got {p.ndim}")
        if (p < -1e-15).any():
            raise InvalidDistributionError("negative entry in joint")
        p = np.clip(p, 0.0, None)
        if abs(p.sum() - 1.0) > MASS_TOL:
            raise InvalidDistributionError(f"total mass {p.sum()} not within {MASS_TOL} of 1")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @property
    def ndim(self) -> int:
        return self.probs.ndim

    def marginal(self, axis: int) -> Distribution:
        axes = tuple(i for i in range(self.probs.ndim) if i != axis)
        return Distribution(self.probs.sum(axis=axes))

    def swap_axes(self, a: int, b: int) -> "JointDistribution":
        return JointDistribution(np.swapaxes(self.probs, a, b))


def joint_from_channel(mu: Distribution, kernel: np.ndarray) -> JointDistribution:
    """Assemble the joint law mu(x) * kernel(y|x).  Rows of kernel sum to 1."""
    k = np.asarray(kernel, dtype=float)
    if k.ndim != 2 or k.shape[0] != mu.size:
        raise InvalidDistributionError("kernel shape does not match source")
    rows = k.sum(axis=1)
    if np.abs(rows[mu.probs > 0] - 1.0).max(initial=0.0) > 1e-10:
        raise InvalidDistributionError("kernel rows on the support must sum to 1")
    joint = mu.probs[:, None] * k
    joint = joint / joint.sum()
    return JointDistribution(joint)


def wasserstein(space: FiniteMetricSpace, p: Distribution, q: Distribution) -> float:
    """Exact optimal-transport cost between p and q under the space's metric.

    Solves the transportation linear program min <d, pi> subject to the
    marginal constraints, with the HiGHS exact LP solver.  Returns 0 for
    identical inputs without invoking the solver.
    """
    n = space.size
    if p.size != n or q.size != n:
        raise InvalidDistributionError(
            f"distribution sizes {p.size}, {q.size} do not match space size {n}")
    if np.array_equal(p.probs, q.probs):
        return 0.0
    c = space.dist.reshape(-1)
    # Row-sum and column-sum constraints; drop one redundant row for stability.
    a_eq = np.zeros((2 * n - 1, n * n))
    b_eq = np.zeros(2 * n - 1)
    for i in range(n):
        a_eq[i, i * n:(i + 1) * n] = 1.0
        b_eq[i] = p.probs[i]
    for j in range(n - 1):
        a_eq[n + j, j::n] = 1.0
        b_eq[n + j] = q.probs[j]
    res = linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if not res.success:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return max(float(res.fun), 0.0)


def wasserstein_exhaustive(space: FiniteMetricSpace, p: Distribution, q: Distribution) -> float:
    """Independent oracle: enumerate all basic feasible couplings (LP vertices).

    Vertices of the transportation polytope have at most 2n-1 nonzero cells
    forming an acyclic support; enumerating all (2n-1)-cell supports and
    solving the marginal equations exactly covers every vertex.  Only for
    spaces with at most 6 points.
    """
    n = space.size
    if n > 6:
        raise ValueError("exhaustive coupling search limited to 6 points")
    cells = list(itertools.product(range(n), range(n)))
    m = 2 * n - 1
    rows = []
    rhs = np.concatenate([p.probs, q.probs[:-1]])
    for i in range(n):
        row = np.zeros(n * n)
        row[i * n:(i + 1) * n] = 1.0
        rows.append(row)
    for j in range(n - 1):
        row = np.zeros(n * n)
        row[j::n] = 1.0
        rows.append(row)
    a_full = np.array(rows)
    best = np.inf
    cost = space.dist.reshape(-1)
    for support in itertools.combinations(range(n * n), m):
        a = a_full[:, support]
        try:
            x = np.linalg.solve(a, rhs)
        except np.linalg.LinAlgError:
            continue
        if (x < -1e-11).any():
            continue
        full = np.zeros(n * n)
        full[list(support)] = np.clip(x, 0.0, None)
        best = min(best, float(cost @ full))
    return best


def load_space_json(doc) -> tuple:
    """Parse a JSON document {"labels": [...], "dist": [[...]], "probs": [...]}.

    Returns (space, distribution_or_None).  Accepts a dict, a JSON string,
    or anything with a .read() method.
    """
    if hasattr(doc, "read"):
        doc = json.load(doc)
    elif isinstance(doc, (str, bytes)):
        doc = json.loads(doc)
    space = FiniteMetricSpace.from_json_dict(doc)
    dist = None
    if "probs" in doc and doc["probs"] is not None:
        probs = np.asarray(doc["probs"], dtype=float)
        if probs.shape[0] != space.size:
            raise InvalidDistributionError("probs length does not match labels")
        dist = Distribution(probs)
    return space, dist
