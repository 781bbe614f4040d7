"""Covering numbers, entropy at scale, and dimension estimates from curves.

Covering numbers follow the open-cover convention: the minimum number of
subsets of diameter strictly below eps needed to cover the space.  On a
finite space this is a minimum clique cover of the graph with edges
d(i, j) < eps, equivalently a minimum coloring of the complement.

Dimension quantities are limits; the estimators here report tail-window
statistics over a sampled scale grid together with the full sequence, so
oscillation stays visible instead of being averaged away.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .metricspace import FiniteMetricSpace
from .ratedistortion import (IIDModel, MarkovModel, MixtureModel, PeriodicModel,
                             RDCurve, ShiftSystem)

BNB_EXACT_LIMIT = 20
ULTRAMETRIC_DETECT_LIMIT = 1024


class CoveringInexactError(RuntimeError):
    """Exact covering count unavailable; carries the (lower, upper) bracket."""

    def __init__(self, lower: int, upper: int):
        super().__init__(f"covering number only bracketed: [{lower}, {upper}]")
        self.lower = lower
        self.upper = upper


def _close_pairs(space: FiniteMetricSpace, eps: float) -> np.ndarray:
    """Boolean adjacency: d(i,j) < eps, diagonal True."""
    return space.dist < eps


def _greedy_cover(adj: np.ndarray) -> int:
    """Greedy partition into cliques of the 'close' graph (diameter < eps sets)."""
    n = adj.shape[0]
    unassigned = np.ones(n, dtype=bool)
    count = 0
    while unassigned.any():
        seed = int(np.argmax(unassigned))
        members = [seed]
        unassigned[seed] = False
        compatible = adj[seed] & unassigned
        while compatible.any():
            nxt = int(np.argmax(compatible))
            members.append(nxt)
            unassigned[nxt] = False
            compatible &= adj[nxt] & unassigned
        count += 1
    return count


def _greedy_separated(adj: np.ndarray) -> int:
    """Greedy maximal set of points pairwise at distance >= eps (a lower bound)."""
    n = adj.shape[0]
    alive = np.ones(n, dtype=bool)
    count = 0
    while alive.any():
        seed = int(np.argmax(alive))
        count += 1
        alive &= ~adj[seed]
        alive[seed] = False
    return count


def _component_count(adj: np.ndarray) -> int:
    n = adj.shape[0]
    seen = np.zeros(n, dtype=bool)
    count = 0
    for i in range(n):
        if seen[i]:
            continue
        count += 1
        stack = [i]
        seen[i] = True
        while stack:
            v = stack.pop()
            nbrs = np.nonzero(adj[v] & ~seen)[0]
            seen[nbrs] = True
            stack.extend(int(u) for u in nbrs)
    return count


def _exact_color_count(conflict: np.ndarray, upper: int, lower: int) -> int:
    """Exact chromatic number of the conflict graph by branch and bound.

    conflict[i, j] True means i and j cannot share a covering set.
    """
    n = conflict.shape[0]
    order = np.argsort(-conflict.sum(axis=1))  # high-degree first
    conflict = conflict[np.ix_(order, order)]
    best = upper
    colors = np.full(n, -1, dtype=int)

    def rec(v: int, used: int) -> None:
        nonlocal best
        if used >= best or best <= lower:
            return
        if v == n:
            best = used
            return
        forbidden = {colors[u] for u in range(v) if conflict[v, u]}
        for c in range(used):
            if c not in forbidden:
                colors[v] = c
                rec(v + 1, used)
        colors[v] = used
        rec(v + 1, used + 1)
        colors[v] = -1

    rec(0, 0)
    return best


def covering_bounds(space: FiniteMetricSpace, eps: float) -> tuple:
    """(lower, upper) bracket: separated-set lower bound, greedy cover upper bound."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    adj = _close_pairs(space, eps)
    return _greedy_separated(adj), _greedy_cover(adj)


def covering_number(space: FiniteMetricSpace, eps: float, *,
                    ultrametric: bool | None = None, method: str = "auto") -> int:
    """Minimum number of subsets of diameter < eps covering the space.

    Exact via the ultrametric ball partition when the metric is (known or
    detected to be) an ultrametric, via branch-and-bound clique cover for
    spaces of at most 20 points, and whenever the greedy upper bound meets
    the separated-set lower bound.  Otherwise raises CoveringInexactError
    carrying both bounds.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = space.size
    if n == 0:
        return 0
    adj = _close_pairs(space, eps)
    if method == "ultrametric" or (method == "auto" and ultrametric is True):
        return _component_count(adj)
    lower, upper = _greedy_separated(adj), _greedy_cover(adj)
    if lower == upper:
        return upper
    if method == "auto" and ultrametric is None and n <= ULTRAMETRIC_DETECT_LIMIT:
        if space.is_ultrametric():
            return _component_count(adj)
    if n <= BNB_EXACT_LIMIT or method == "bnb":
        if n > 2 * BNB_EXACT_LIMIT:
            raise CoveringInexactError(lower, upper)
        return _exact_color_count(~adj & ~np.eye(n, dtype=bool), upper, lower)
    raise CoveringInexactError(lower, upper)


def separation_number(space: FiniteMetricSpace, eps: float) -> int:
    """Maximum number of points pairwise at distance >= eps (greedy lower bound
    refined exactly for spaces of at most 20 points)."""
    adj = _close_pairs(space, eps)
    greedy = _greedy_separated(adj)
    n = space.size
    if n > BNB_EXACT_LIMIT:
        return greedy
    conflict = ~adj
    best = greedy

    def rec(candidates: list, chosen: int) -> None:
        nonlocal best
        if chosen + len(candidates) <= best:
            return
        if not candidates:
            best = max(best, chosen)
            return
        v = candidates[0]
        rec([u for u in candidates[1:] if conflict[v, u]], chosen + 1)
        rec(candidates[1:], chosen)

    rec(list(range(n)), 0)
    return best


# ---------------------------------------------------------------------------
# Entropy at scale
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScaleEntropy:
    """S(eps) in bits per site, with exactness and method information."""

    value: float
    exact: bool
    method: str
    details: dict = field(default_factory=dict)


def _alphabet_cover_pack(alphabet, eps: float) -> tuple:
    """(covering count, separated count) at scale eps for any alphabet."""
    if hasattr(alphabet, "covering_count"):
        return alphabet.covering_count(eps), alphabet.separated_count(eps)
    cover = covering_number(alphabet, eps)
    pack = separation_number(alphabet, eps)
    return cover, pack


def _support_alphabet(sys: ShiftSystem):
    """Alphabet restricted to the support of the single-letter law."""
    alphabet = sys.alphabet
    if not isinstance(alphabet, FiniteMetricSpace):
        return alphabet  # symbolic alphabets carry uniform laws
    law = sys.single_letter_law().probs
    idx = np.nonzero(law > 0)[0]
    if idx.shape[0] == alphabet.size:
        return alphabet
    labels = tuple(alphabet.labels[i] for i in idx)
    return FiniteMetricSpace(labels, alphabet.dist[np.ix_(idx, idx)])


def relevant_pad(diameter: float, decay: float, eps: float) -> int:
    """Smallest l with decay^l * diameter < eps: coordinates at offset >= l
    from the window cannot contribute to the dynamical distance at scale eps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    pad = 0
    while decay ** pad * diameter >= eps:
        pad += 1
        if pad > 10_000:
            raise RuntimeError("scale too small relative to the decay weight")
    return pad


def full_shift_window_count(alphabet, decay: float, eps: float, window: int) -> tuple:
    """Covering count of a full shift under the window metric d_L: (count, exact).

    Coordinate at offset delta from the window carries weight decay^delta, so
    it matters only when decay^delta * diam >= eps, and the count factorizes
    as the product over relevant coordinates of the alphabet covering count
    at the rescaled threshold.  The product is exact when covering equals
    packing at every needed scale (true for ultrametric, cluster, and
    discrete alphabets); otherwise it is an upper count.
    """
    diam = alphabet.diameter()
    pad = relevant_pad(diam, decay, eps)
    count = 1
    exact = True
    for delta in range(pad):
        scale = eps / (decay ** delta)
        cover, pack = _alphabet_cover_pack(alphabet, scale)
        mult = window if delta == 0 else 2
        count *= cover ** mult
        exact = exact and (cover == pack)
    return count, exact


def entropy_at_scale(sys: ShiftSystem, eps: float, window_max: int = 3) -> ScaleEntropy:
    """S(eps): exponential growth rate per site of eps-covering numbers.

    Full shifts admit the closed form S = log2 #(A_support, d_A, eps): window
    coordinates each force an independent choice among #(A, eps) classes and
    boundary coordinates contribute O(1) in the window size.  Periodic orbits
    have finitely many points, so S = 0.  Markov models get a finite-window
    estimate at window_max and window_max + 1.  Mixtures take the maximum
    over components, the growth rate of the union of the supports.
    """
    model = sys.model
    if isinstance(model, MixtureModel):
        parts = [entropy_at_scale(ShiftSystem(sys.alphabet, m, sys.lattice_dim, sys.decay),
                                  eps, window_max)
                 for _, m in model.components]
        best = max(parts, key=lambda r: r.value)
        return ScaleEntropy(best.value, all(p.exact for p in parts), "mixture-max",
                            {"components": [p.value for p in parts]})
    if isinstance(model, PeriodicModel):
        return ScaleEntropy(0.0, True, "finite-orbit", {"orbit": len(model.word)})
    if isinstance(model, IIDModel):
        alphabet = _support_alphabet(sys)
        if eps > alphabet.diameter():
            return ScaleEntropy(0.0, True, "above-diameter", {})
        cover, pack = _alphabet_cover_pack(alphabet, eps)
        return ScaleEntropy(float(math.log2(cover)), cover == pack, "full-shift",
                            {"cover": cover, "pack": pack})
    if isinstance(model, MarkovModel):
        values = {}
        for window in (window_max, window_max + 1):
            values[window] = _markov_window_entropy(sys, eps, window)
        return ScaleEntropy(values[window_max + 1], False, "finite-window",
                            {"per_window": values})
    raise TypeError(f"unknown measure model {type(model)!r}")


def _markov_window_entropy(sys: ShiftSystem, eps: float, window: int) -> float:
    """log2 #(positive-probability padded blocks, weighted sup metric, eps) / window."""
    alphabet = sys.alphabet
    model = sys.model
    diam = alphabet.diameter()
    pad = max(relevant_pad(diam, sys.decay, eps) - 1, 0)
    length = window + 2 * pad
    k = alphabet.size
    if k ** length > 1024:
        raise ValueError("padded window too large for the finite-window estimate")
    import itertools as it
    words = [w for w in it.product(range(k), repeat=length)
             if _markov_positive(model, w)]
    codes = np.array(words, dtype=np.intp)
    offsets = np.array([max(0, pad - i, i - (pad + window - 1)) for i in range(length)])
    weights = sys.decay ** offsets
    dist = np.zeros((len(words), len(words)))
    for pos in range(length):
        dist = np.maximum(dist, weights[pos] * alphabet.dist[np.ix_(codes[:, pos], codes[:, pos])])
    space = FiniteMetricSpace(tuple(str(i) for i in range(len(words))), dist)
    count = covering_number(space, eps)
    return float(math.log2(count)) / window


def _markov_positive(model: MarkovModel, word) -> bool:
    if model.stationary[word[0]] <= 0:
        return False
    for a, b in zip(word, word[1:]):
        if model.transition[a, b] <= 0:
            return False
    return True


# ---------------------------------------------------------------------------
# Dimension estimates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TailEstimate:
    upper: float
    lower: float
    converged: bool
    t_values: tuple
    ratios: tuple


def tail_ratios(t_values, values, tail_fraction: float) -> TailEstimate:
    """max/min of values[i] / t[i] over the trailing tail_fraction of the grid."""
    t = np.asarray(list(t_values), dtype=float)
    v = np.asarray(list(values), dtype=float)
    if t.shape != v.shape or t.size == 0:
        raise ValueError("mismatched or empty grids")
    if (t <= 0).any():
        raise ValueError("dimension ratios need t = log2(1/eps) > 0")
    start = int(np.floor(t.size * (1.0 - tail_fraction)))
    start = min(max(start, 0), t.size - 1)
    ratios = v / t
    tail = ratios[start:]
    upper, lower = float(tail.max()), float(tail.min())
    return TailEstimate(upper=upper, lower=lower, converged=(upper - lower) <= 0.1,
                        t_values=tuple(t[start:]), ratios=tuple(ratios))


def metric_mean_dim_upper(sys: ShiftSystem, t_grid, *, tail_fraction: float = 0.5,
                          window_max: int = 3) -> TailEstimate:
    """Upper metric mean dimension estimate: limsup of S(2^-t)/t over the tail.

    Reports the full ratio sequence so oscillation stays visible.
    """
    t_grid = [float(t) for t in t_grid]
    if len(t_grid) < 3:
        raise ValueError("need at least 3 grid points for a tail estimate")
    if any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise ValueError("t grid must be strictly increasing")
    s_values = [entropy_at_scale(sys, 2.0 ** (-t), window_max).value for t in t_grid]
    for (t1, s1), (t2, s2) in zip(zip(t_grid, s_values), zip(t_grid[1:], s_values[1:])):
        if s2 < s1 - 1e-9:
            raise ValueError(f"S must be non-decreasing as eps shrinks: S@{t1}={s1} > S@{t2}={s2}")
    return tail_ratios(t_grid, s_values, tail_fraction)


def rdim_estimates(curve: RDCurve, tail_fraction: float = 0.5) -> TailEstimate:
    """(upper, lower) slope statistics R(2^-t)/t over the curve's tail window.

    Flags non-convergence (converged=False) when the spread exceeds 0.1.
    """
    samples = [s for s in curve.samples if s.eps < 1.0]
    if not samples:
        raise ValueError("curve has no samples with eps < 1")
    t = [s.t for s in samples]
    r = [s.rate for s in samples]
    return tail_ratios(t, r, tail_fraction)


@dataclass
class DimensionReport:
    """Scale entropies and dimension estimates over a dyadic grid."""

    t_grid: list
    scale_entropies: list
    mmdim_upper: TailEstimate
    rdim: TailEstimate | None
    tail_fraction: float

    def __post_init__(self):
        pairs = list(zip(self.t_grid, self.scale_entropies))
        for (t1, s1), (t2, s2) in zip(pairs, pairs[1:]):
            if t2 > t1 and s2 < s1 - 1e-9:
                raise ValueError("scale entropy must not decrease as eps shrinks")

    def to_json_dict(self) -> dict:
        doc = {
            "t_grid": list(self.t_grid),
            "S_bits_per_site": list(self.scale_entropies),
            "mmdim_upper_estimate": self.mmdim_upper.upper,
            "mmdim_ratios": list(self.mmdim_upper.ratios),
            "tail_fraction": self.tail_fraction,
        }
        if self.rdim is not None:
            doc["rdim_upper"] = self.rdim.upper
            doc["rdim_lower"] = self.rdim.lower
            doc["rdim_converged"] = self.rdim.converged
        return doc

    def to_csv(self) -> str:
        lines = ["t,eps,S_bits_per_site,S_over_t"]
        for t, s in zip(self.t_grid, self.scale_entropies):
            lines.append(f"{t:.9g},{2.0 ** (-t):.9g},{s:.9g},{s / t:.9g}")
        return "\n".join(lines) + "\n"


def dimension_report(sys: ShiftSystem, t_grid, *, curve: RDCurve | None = None,
                     tail_fraction: float = 0.5, window_max: int = 3) -> DimensionReport:
    t_grid = [float(t) for t in t_grid]
    mm = metric_mean_dim_upper(sys, t_grid, tail_fraction=tail_fraction,
                               window_max=window_max)
    s_values = [entropy_at_scale(sys, 2.0 ** (-t), window_max).value for t in t_grid]
    rd = rdim_estimates(curve, tail_fraction) if curve is not None else None
    return DimensionReport(t_grid=t_grid, scale_entropies=s_values,
                           mmdim_upper=mm, rdim=rd, tail_fraction=tail_fraction)
