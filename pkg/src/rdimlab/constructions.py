"""Desk-scale generators for the bundled example systems.

Four families:

* cluster shifts and their mixtures: each component is a full shift over a
  cluster alphabet of 2^g(m) letters at pairwise distance 1/m, carrying the
  uniform i.i.d. law.  Every component has bounded rate (so its dimension
  slope decays like g/t), yet the mixture's certified rate lower bounds grow
  without bound along eps = 6^-n as the truncation deepens.
* gapped shifts: full shift over the gapped ultrametric alphabet, whose
  covering staircase makes the dimension ratio S(2^-t)/t oscillate between
  ~1 (at t = c_k) and <= 1/k (on [b_k, a_{k+1})).
* interleaved pairs: two gapped shifts on alternating schedules whose
  oscillations are out of phase, so the half/half mixture's upper slope
  stays near 1/2 while each component certifies slope near 1 at its own
  sample points.
* the periodic-approximation demo: periodic mixtures converge weakly to the
  uniform i.i.d. law while their rates collapse, exhibiting the
  discontinuity of the rate in the measure.

Growth note: the reference cluster growth g(m) = 3^m is reproduced for
m <= 2; beyond that the alphabets (2^27 letters and up) are out of desk
range, so the bundled default uses g(m) = 8m, which keeps g - 4m - 1
positive and growing while preserving the mechanism (per-site payoff g
versus linear-in-m slope cost).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .alphabets import ClusterAlphabet, GapSchedule, GappedAlphabet, ScheduleError
from .certificates import (LowerBoundCertificate, certified_lower_bound,
                           check_feasibility, cluster_shift_certificate,
                           gapped_shift_certificate, grid_shift_certificate,
                           mixture_certified_lower)
from .metricspace import FiniteMetricSpace, grid_space, wasserstein
from .mixture import MeasureMixture
from .ratedistortion import (IIDModel, MixtureModel, PeriodicModel, ShiftSystem,
                             build_block_source, rate_at_distortion)

DESK_DECAY = 0.5


# ---------------------------------------------------------------------------
# Cluster shifts and mixtures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClusterMixtureParams:
    """Growth schedule for a truncated mixture of cluster shifts.

    growth[m-1] = g(m) with alphabet size 2^g(m); weights default to 2^-m
    renormalized over m <= m_max.
    """

    growth: tuple
    weights: tuple | None = None

    def __post_init__(self):
        g = tuple(int(x) for x in self.growth)
        if not g:
            raise ValueError("need at least one growth entry")
        if any(x < 2 for x in g):
            raise ValueError("growth values must be at least 2")
        if any(b <= a for a, b in zip(g, g[1:])):
            raise ValueError("growth must be strictly increasing")
        object.__setattr__(self, "growth", g)
        if self.weights is None:
            raw = np.array([2.0 ** (-m) for m in range(1, len(g) + 1)])
            object.__setattr__(self, "weights", tuple(float(x) for x in raw / raw.sum()))
        else:
            w = np.asarray(self.weights, dtype=float)
            if w.shape[0] != len(g) or (w <= 0).any():
                raise ValueError("weights must be positive and match the growth length")
            if abs(w.sum() - 1.0) > 1e-12:
                raise ValueError("weights must sum to 1")
            object.__setattr__(self, "weights", tuple(float(x) for x in w))

    @property
    def m_max(self) -> int:
        return len(self.growth)

    @classmethod
    def reference(cls, m_max: int = 2) -> "ClusterMixtureParams":
        """The 3^m growth of the source construction, truncated to m_max <= 2."""
        return cls(tuple(3 ** m for m in range(1, m_max + 1)))

    @classmethod
    def desk(cls, m_max: int = 3) -> "ClusterMixtureParams":
        return cls(tuple(8 * m for m in range(1, m_max + 1)))


def build_cluster_shift(m: int, g: int, *, decay: float = DESK_DECAY) -> ShiftSystem:
    """Uniform full shift over 2^g letters at pairwise distance 1/m."""
    return ShiftSystem(ClusterAlphabet(m=m, g=g), IIDModel(None), 1, decay,
                       name=f"cluster(m={m},g={g})")


def cluster_mixture(params: ClusterMixtureParams) -> MeasureMixture:
    comps = tuple((w, build_cluster_shift(m + 1, g))
                  for m, (w, g) in enumerate(zip(params.weights, params.growth)))
    return MeasureMixture(comps, name="cluster-mixture")


def cluster_mixture_certificates(params: ClusterMixtureParams, window: int = 1) -> list:
    """Verified witness certificates, one per component."""
    certs = []
    for m, g in enumerate(params.growth, start=1):
        cert = cluster_shift_certificate(m, g, window)
        check_feasibility(cert, mode="closed_form")
        certs.append([cert])
    return certs


def glued_cluster_space(params: ClusterMixtureParams) -> FiniteMetricSpace:
    """All cluster alphabets in one space, cross distances max(1/m, 1/m').

    Only used by direct block-rate cross-checks at toy sizes; certificates
    and the allocation formula never need it.
    """
    sizes = [2 ** g for g in params.growth]
    total = sum(sizes)
    if total > 512:
        raise ValueError("glued alphabet too large; use the symbolic components")
    owner = np.concatenate([np.full(s, m + 1) for m, s in enumerate(sizes)])
    spacing = 1.0 / np.minimum(owner[:, None], owner[None, :])
    dist = spacing * 1.0
    start = 0
    for m, s in enumerate(sizes, start=1):
        block = slice(start, start + s)
        dist[block, block] = (1.0 / m) * (1.0 - np.eye(s))
        start += s
    labels = []
    for m, s in enumerate(sizes, start=1):
        labels.extend(f"m{m}_{i}" for i in range(s))
    return FiniteMetricSpace(tuple(labels), dist)


def glued_cluster_mixture(params: ClusterMixtureParams,
                          *, decay: float = DESK_DECAY) -> MeasureMixture:
    """The same mixture over one glued alphabet, enabling direct block rates."""
    space = glued_cluster_space(params)
    sizes = [2 ** g for g in params.growth]
    comps = []
    start = 0
    for (w, s) in zip(params.weights, sizes):
        p = np.zeros(space.size)
        p[start:start + s] = 1.0 / s
        comps.append((w, ShiftSystem(space, IIDModel(p), 1, decay,
                                     name=f"glued-cluster-{len(comps) + 1}")))
        start += s
    return MeasureMixture(tuple(comps), name="glued-cluster-mixture")


@dataclass
class ClusterMixtureReport:
    """Certified mixture lower bounds along eps = 6^-n against component slopes."""

    params: ClusterMixtureParams
    rows: list               # (n, eps, certified, formula_value, formula_certified_here)
    component_slope_bound: list  # (m, g, tail slope bound g / t_tail)
    tail_t: float
    strictly_increasing: bool = field(init=False)

    def __post_init__(self):
        vals = [r[2] for r in self.rows]
        self.strictly_increasing = all(b > a + 1e-12 for a, b in zip(vals, vals[1:]))

    def to_json_dict(self) -> dict:
        return {
            "growth": list(self.params.growth),
            "weights": list(self.params.weights),
            "rows": [
                {"n": n, "eps": eps, "certified_bits_per_site": c,
                 "weighted_formula_value": f, "formula_certified_at_this_eps": ok}
                for n, eps, c, f, ok in self.rows
            ],
            "component_upper_slope_at_tail": [
                {"m": m, "g": g, "slope_bound": s} for m, g, s in self.component_slope_bound
            ],
            "tail_t": self.tail_t,
            "certified_strictly_increasing": self.strictly_increasing,
        }


def cluster_mixture_report(params: ClusterMixtureParams, *, n_values=None,
                           tail_factor: float = 20.0) -> ClusterMixtureReport:
    """Certified R(mixture, 6^-n) via allocation over component certificates.

    Also reports the weighted closed-form value w_n * (g(n) - 4n - 1), which
    is certified at eps = 6^-n only when 6^-n <= w_n / g(n) (true for the
    reference growth, not always for faster weights/growth combinations),
    and each component's covering-slope bound g / t at a deep tail point,
    which vanishes as t grows because component rates are bounded by g.
    """
    n_values = list(n_values or range(1, params.m_max + 1))
    certs = cluster_mixture_certificates(params)
    weights = list(params.weights)
    rows = []
    for n in n_values:
        eps = 6.0 ** (-n)
        certified = mixture_certified_lower(weights, certs, eps)
        g = params.growth[n - 1] if n <= params.m_max else None
        if g is not None:
            formula = float(weights[n - 1] * (g - 4 * n - 1))
            valid = bool(eps <= weights[n - 1] / g + 1e-15)
        else:
            formula, valid = None, False
        rows.append((n, float(eps), float(certified), formula, valid))
    tail_t = tail_factor * max(params.growth)
    comp_rows = [(m, g, g / tail_t) for m, g in enumerate(params.growth, start=1)]
    return ClusterMixtureReport(params=params, rows=rows,
                                component_slope_bound=comp_rows, tail_t=tail_t)


# ---------------------------------------------------------------------------
# Gapped shifts and the interleaved pair
# ---------------------------------------------------------------------------

def desk_gap_schedule() -> GapSchedule:
    """The bundled schedule: a = (2, 12, 240), b = (5, 50, 2200), N = 26."""
    return GapSchedule(a=(2, 12, 240), b=(5, 50, 2200), truncation=26)


def desk_interleaved_base() -> GapSchedule:
    """Base schedule for the interleaved pair; satisfies both constraint families.

    Chosen with margin so that the mixture's covering upper slope at the
    common certified sample points stays below 0.6 (the single-system desk
    schedule would give 0.604 at t = 24).
    """
    return GapSchedule(a=(2, 15, 400, 40000), b=(5, 90, 4000), truncation=32,
                       require_interleavable=True)


def build_gapped_shift(schedule: GapSchedule, *, decay: float = DESK_DECAY,
                       name: str = "gapped") -> ShiftSystem:
    """Uniform full shift over the gapped ultrametric alphabet."""
    return ShiftSystem(GappedAlphabet(schedule), IIDModel(None), 1, decay, name=name)


def gapped_certificates(sys: ShiftSystem, *, window: int = 1,
                        mode: str = "closed_form") -> list:
    """Verified stage certificates for every k with c_k within the truncation."""
    alphabet = sys.alphabet
    if not isinstance(alphabet, GappedAlphabet):
        raise TypeError("expected a gapped shift")
    certs = []
    for k in alphabet.schedule.certified_ks():
        cert = gapped_shift_certificate(alphabet, k, window)
        check_feasibility(cert, mode=mode)
        certs.append(cert)
    return certs


def build_interleaved_pair(base: GapSchedule, *, decay: float = DESK_DECAY) -> tuple:
    """Two gapped shifts on alternating schedules (a_k, b_k) and (b_k, a_{k+1})."""
    try:
        first, second = base.interleave()
    except ScheduleError as exc:
        raise ScheduleError(f"base schedule cannot be interleaved: {exc}") from exc
    return (build_gapped_shift(first, decay=decay, name="interleaved-1"),
            build_gapped_shift(second, decay=decay, name="interleaved-2"))


@dataclass
class InterleavedReport:
    """Certified component slopes against the mixture's covering upper slopes."""

    common_t_grid: list
    component_max_certified_slope: list   # per system, max over its own c_k points
    component_certified_points: list      # per system, list of (c_k, slope)
    mixture_upper_ratios: list            # (t, ratio) on the common grid
    mixture_upper_max: float
    mixture_certified_ratios: list        # (t, ratio) certified lower on common grid

    def to_json_dict(self) -> dict:
        return {
            "common_t_grid": list(self.common_t_grid),
            "component_max_certified_slope": list(self.component_max_certified_slope),
            "component_certified_points": [
                [{"t": t, "slope": s} for t, s in pts]
                for pts in self.component_certified_points
            ],
            "mixture_upper": [{"t": t, "ratio": r} for t, r in self.mixture_upper_ratios],
            "mixture_upper_max": self.mixture_upper_max,
            "mixture_certified": [
                {"t": t, "ratio": r} for t, r in self.mixture_certified_ratios
            ],
        }


def interleaved_experiment(base: GapSchedule | None = None,
                           *, tail_fraction: float = 0.5) -> InterleavedReport:
    """Desk analogue of the strict-inequality phenomenon for mixtures.

    Each component certifies slope near 1 at its own sample scales
    t = c_k, while the half/half mixture's covering upper bound on the
    common grid (the union of both components' certified scales) stays near
    1/2: at any common scale one component is inside its low-complexity gap.
    """
    base = base or desk_interleaved_base()
    sys1, sys2 = build_interleaved_pair(base)
    systems = [sys1, sys2]
    certs = [gapped_certificates(s) for s in systems]
    points = []
    maxima = []
    for sys, cert_list in zip(systems, certs):
        sched = sys.alphabet.schedule
        own = []
        for cert, k in zip(cert_list, sched.certified_ks()):
            t = sched.c(k)
            own.append((t, certified_lower_bound(cert, 2.0 ** (-t)) / t))
        points.append(own)
        maxima.append(max(s for _, s in own))
    common = sorted({t for own in points for t, _ in own})
    start = int(np.floor(len(common) * (1.0 - tail_fraction)))
    tail = common[min(start, len(common) - 1):]
    upper = []
    for t in tail:
        s_vals = [sys.alphabet.prefix_depth(2.0 ** (-t)) for sys in systems]
        upper.append((t, 0.5 * (s_vals[0] + s_vals[1]) / t))
    certified = [(t, mixture_certified_lower([0.5, 0.5], certs, 2.0 ** (-t)) / t)
                 for t in tail]
    return InterleavedReport(
        common_t_grid=tail,
        component_max_certified_slope=maxima,
        component_certified_points=points,
        mixture_upper_ratios=upper,
        mixture_upper_max=max(r for _, r in upper),
        mixture_certified_ratios=certified,
    )


# ---------------------------------------------------------------------------
# Discontinuity demo: periodic approximations of the uniform i.i.d. law
# ---------------------------------------------------------------------------

def random_periodic_model(q: int, period: int) -> MixtureModel:
    """Uniform mixture over all period-n orbits with uniform n-blocks.

    Equivalently: draw a uniform word of length n, repeat it periodically,
    and shift by a uniform phase; the window law is uniform over n-periodic
    window words.
    """
    import itertools
    words = list(itertools.product(range(q), repeat=period))
    weight = 1.0 / len(words)
    return MixtureModel(tuple((weight, PeriodicModel(w)) for w in words))


@dataclass
class DiscontinuityDemo:
    """Periodic mixtures converge weakly to i.i.d. while their rates collapse."""

    q: int
    n_list: tuple
    periodic_systems: dict
    iid_system: ShiftSystem
    certificate: LowerBoundCertificate

    def marginal_gap(self, n: int) -> float:
        space = self.iid_system.alphabet
        p = self.periodic_systems[n].single_letter_law()
        return wasserstein(space, p, self.iid_system.single_letter_law())

    def report(self, *, window: int = 4, eps: float = 1.0 / 64) -> dict:
        rows = []
        for n in self.n_list:
            src = build_block_source(self.periodic_systems[n], window)
            rate = rate_at_distortion(src.probs, src.rho, eps) / src.sites
            entropy_cap = (n * np.log2(self.q) + np.log2(n)) / window
            rows.append({"period": n,
                         "rate_per_site": rate,
                         "entropy_over_window": float(entropy_cap),
                         "marginal_wasserstein_gap": self.marginal_gap(n)})
        iid_src = build_block_source(self.iid_system, 1)
        iid_rate = rate_at_distortion(iid_src.probs, iid_src.rho, eps)
        certified = certified_lower_bound(self.certificate, eps)
        return {
            "q": self.q,
            "window": window,
            "eps": eps,
            "periodic": rows,
            "iid_rate_per_site": iid_rate,
            "iid_certified_lower": certified,
        }


def build_periodic_discontinuity_demo(q: int, n_list, *, decay: float = DESK_DECAY,
                                      ) -> DiscontinuityDemo:
    if q < 2:
        raise ValueError("need at least 2 grid letters")
    space = grid_space(q)
    periodic = {int(n): ShiftSystem(space, random_periodic_model(q, int(n)), 1, decay,
                                    name=f"periodic-{n}")
                for n in n_list}
    iid = ShiftSystem(space, IIDModel(np.full(q, 1.0 / q)), 1, decay, name="iid-uniform")
    cert = grid_shift_certificate(q, 1)
    check_feasibility(cert, mode="closed_form")
    return DiscontinuityDemo(q=q, n_list=tuple(int(n) for n in n_list),
                             periodic_systems=periodic, iid_system=iid,
                             certificate=cert)
