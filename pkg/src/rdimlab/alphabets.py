"""Structured alphabets that stay symbolic when too large to materialize.

Two families drive the bundled counterexample systems:

* ClusterAlphabet: 2^g points, every pair at distance 1/m.  Covering numbers
  and witness feasibility only need (g, m), never an enumeration.
* GappedAlphabet: truncated binary sequences under the ultrametric
  rho(v, w) = 2^(-h(first differing index)), where h is the staircase built
  from a gap schedule.  Balls partition the space, so covering numbers have
  an exact closed form.

Both expose `covering_count(eps)` and can `materialize()` into a
FiniteMetricSpace when small enough for exhaustive cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .metricspace import FiniteMetricSpace

MATERIALIZE_CAP = 4096


class ScheduleError(ValueError):
    """A gap schedule violates one of its integer constraints."""


@dataclass(frozen=True)
class ClusterAlphabet:
    """2^g abstract points, pairwise distance exactly 1/m."""

    m: int
    g: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("cluster spacing parameter m must be >= 1")
        if self.g < 2:
            raise ValueError("cluster exponent g must be >= 2")

    @property
    def size(self) -> int:
        return 2 ** self.g

    @property
    def spacing(self) -> float:
        return 1.0 / self.m

    def diameter(self) -> float:
        return self.spacing

    def min_positive_distance(self) -> float:
        return self.spacing

    def covering_count(self, eps: float) -> int:
        # Any set with two points has diameter exactly 1/m.
        return 1 if eps > self.spacing else self.size

    def separated_count(self, eps: float) -> int:
        """Maximum number of points pairwise at distance >= eps."""
        return self.size if eps <= self.spacing else 1

    def materialize(self) -> FiniteMetricSpace:
        n = self.size
        if n > MATERIALIZE_CAP:
            raise ValueError(f"cluster alphabet with {n} points exceeds materialization cap")
        d = self.spacing * (1.0 - np.eye(n))
        return FiniteMetricSpace(tuple(f"c{i}" for i in range(n)), d)

    def describe(self) -> dict:
        return {"kind": "cluster", "m": self.m, "g": self.g, "size": self.size,
                "spacing": self.spacing}


@dataclass(frozen=True)
class GapSchedule:
    """Increasing integers a_1 < b_1 < a_2 < ... with b_k > k^2 a_k.

    Derived quantities: c_k = k * a_k and the staircase
        h(n) = n        for n <= a_1 or n in [a_k, c_k],
        h(n) = a_{k+1}  for n in (c_k, a_{k+1}].
    h is monotone non-decreasing with h(n) >= n.  All checks are exact
    integer arithmetic.
    """

    a: tuple
    b: tuple
    truncation: int
    require_interleavable: bool = False

    def __post_init__(self):
        a = tuple(int(x) for x in self.a)
        b = tuple(int(x) for x in self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if not a or len(b) > len(a):
            raise ScheduleError("need at least as many a entries as b entries")
        merged = []
        for k in range(len(a)):
            merged.append(a[k])
            if k < len(b):
                merged.append(b[k])
        if any(x <= 0 for x in merged):
            raise ScheduleError("schedule entries must be positive")
        if any(merged[i] >= merged[i + 1] for i in range(len(merged) - 1)):
            i = next(i for i in range(len(merged) - 1) if merged[i] >= merged[i + 1])
            raise ScheduleError(f"schedule not strictly increasing at position {i}: {merged}")
        for k in range(len(b)):
            if b[k] <= (k + 1) ** 2 * a[k]:
                raise ScheduleError(
                    f"b_{k + 1} = {b[k]} must exceed k^2 * a_k = {(k + 1) ** 2 * a[k]}")
        if self.require_interleavable:
            for k in range(len(b)):
                if k + 1 < len(a) and a[k + 1] <= (k + 1) ** 2 * b[k]:
                    raise ScheduleError(
                        f"a_{k + 2} = {a[k + 1]} must exceed k^2 * b_k = {(k + 1) ** 2 * b[k]}")
        if self.truncation < 1:
            raise ScheduleError("truncation must be positive")
        if self.h_defined_up_to() < self.truncation + 1:
            raise ScheduleError(
                f"schedule defines h only up to {self.h_defined_up_to()}, "
                f"truncation {self.truncation} needs h up to {self.truncation + 1}")

    @property
    def pair_count(self) -> int:
        return len(self.b)

    def c(self, k: int) -> int:
        """c_k = k * a_k (1-based k)."""
        if not 1 <= k <= len(self.a):
            raise ScheduleError(f"k = {k} outside schedule")
        return k * self.a[k - 1]

    def h_defined_up_to(self) -> int:
        """h(n) is computable for n up to c_K, or a_{K+1} when one more a is known."""
        kmax = self.pair_count
        if len(self.a) > kmax:
            return self.a[kmax]
        return self.c(kmax)

    def h(self, n: int) -> int:
        if n < 1:
            raise ScheduleError("h is defined on positive integers")
        if n <= self.a[0]:
            return n
        for k in range(1, len(self.a) + 1):
            ak, ck = self.a[k - 1], self.c(k)
            if ak <= n <= ck:
                return n
            if k < len(self.a) and ck < n <= self.a[k]:
                return self.a[k]
        raise ScheduleError(f"h({n}) beyond the provided schedule")

    def certified_ks(self) -> list:
        """k values whose c_k fits the truncation with the required slack."""
        return [k for k in range(1, len(self.a) + 1)
                if self.c(k) <= self.truncation - 2]

    def interleave(self) -> tuple:
        """Two schedules whose gap regions alternate: pairs (a_k, b_k) and (b_k, a_{k+1}).

        Requires the stronger constraint a_{k+1} > k^2 b_k on this schedule
        and one more a entry than b entries.  Truncations are sized so each
        output certifies its own k = 2 point (c_2 <= N - 2).
        """
        chk = GapSchedule(self.a, self.b, self.truncation, require_interleavable=True)
        kk = chk.pair_count
        if len(chk.a) <= kk:
            raise ScheduleError("interleaving needs one more a entry than b entries")
        first = GapSchedule(chk.a[:kk], chk.b[:kk], truncation=2 * chk.a[1] + 2)
        second = GapSchedule(chk.b[:kk], chk.a[1:kk + 1], truncation=2 * chk.b[1] + 2)
        return first, second

    def describe(self) -> dict:
        return {"a": list(self.a), "b": list(self.b),
                "c": [self.c(k) for k in range(1, len(self.a) + 1)],
                "truncation": self.truncation}


@dataclass(frozen=True)
class GappedAlphabet:
    """Binary strings of length N under rho(v,w) = 2^(-h(first differing index))."""

    schedule: GapSchedule
    _h_table: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.schedule.truncation
        table = np.array([self.schedule.h(i) for i in range(1, n + 2)], dtype=np.int64)
        object.__setattr__(self, "_h_table", table)

    @property
    def bits(self) -> int:
        return self.schedule.truncation

    @property
    def size(self) -> int:
        return 2 ** self.bits

    def h(self, n: int) -> int:
        return int(self._h_table[n - 1])

    def diameter(self) -> float:
        return 2.0 ** (-self.h(1))

    def min_positive_distance(self) -> float:
        return 2.0 ** (-self.h(self.bits))

    def distance_profile(self) -> tuple:
        """(masses, distances): mass 2^-i of points first-differing at index i <= N,
        plus mass 2^-N at distance 0 (full agreement), under the uniform law."""
        n = self.bits
        masses = np.array([2.0 ** (-i) for i in range(1, n + 1)] + [2.0 ** (-n)])
        dists = np.array([2.0 ** (-self.h(i)) for i in range(1, n + 1)] + [0.0])
        return masses, dists

    def prefix_depth(self, eps: float) -> int:
        """Smallest n with every cylinder on the first n coordinates of diameter < eps.

        Cylinders fixing n coordinates have diameter 2^(-h(n+1)), and any
        set of diameter < eps fits inside one such cylinder, so 2^depth is
        the exact covering number.  Capped at N, where cylinders degenerate
        to singletons.
        """
        if eps <= 0:
            raise ValueError("eps must be positive")
        for n in range(self.bits):
            if 2.0 ** (-self.h(n + 1)) < eps:
                return n
        return self.bits

    def covering_count(self, eps: float) -> int:
        return 2 ** self.prefix_depth(eps)

    def separated_count(self, eps: float) -> int:
        # Ultrametric: packing at eps equals covering at eps.
        return self.covering_count(eps)

    def materialize(self) -> FiniteMetricSpace:
        n = self.bits
        if 2 ** n > MATERIALIZE_CAP:
            raise ValueError(f"gapped alphabet with 2^{n} points exceeds materialization cap")
        size = 2 ** n
        codes = ((np.arange(size)[:, None] >> np.arange(n)[None, :]) & 1).astype(np.int8)
        first_diff = np.full((size, size), n + 1, dtype=np.int64)
        for bit in range(n - 1, -1, -1):
            differ = codes[:, None, bit] != codes[None, :, bit]
            first_diff[differ] = bit + 1
        h_of = np.concatenate([self._h_table, [0]])
        dist = np.where(first_diff <= n, 2.0 ** (-h_of[first_diff - 1]), 0.0)
        np.fill_diagonal(dist, 0.0)
        labels = tuple("".join(str(b) for b in row) for row in codes)
        return FiniteMetricSpace(labels, dist)

    def describe(self) -> dict:
        return {"kind": "gapped", "bits": self.bits, "schedule": self.schedule.describe()}


def covering_count_of(alphabet, eps: float) -> int:
    """Exact covering count for a structured alphabet or a finite metric space."""
    if hasattr(alphabet, "covering_count"):
        return alphabet.covering_count(eps)
    from .dimension import covering_number
    return covering_number(alphabet, eps)


def alphabet_size(alphabet) -> int:
    return alphabet.size if hasattr(alphabet, "size") else len(alphabet)
