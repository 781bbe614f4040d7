"""Distortion allocation across mixture components and decomposition experiments.

The rate of a finite measure mixture equals the infimum of the weighted
component rates over all splits of the distortion budget.  `allocate`
computes that infimum on sampled piecewise-linear component curves by
bisection on the common Lagrange slope; `mixture_formula_check` verifies the
finite-window sandwich
    V(eps) - tol <= R_L(mix)/L^d <= V(eps) + log2(#components)/L^d + tol,
whose upper overhead is the classification cost of announcing which
component produced the sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .certificates import certificate_envelope, mixture_certified_lower
from .dimension import TailEstimate, entropy_at_scale, tail_ratios
from .metricspace import FiniteMetricSpace
from .ratedistortion import (MixtureModel, ShiftSystem, build_block_source,
                             rate_at_distortion, sample_curve_by_slope)

CONVEXITY_TOL = 1e-6
BUDGET_TOL = 1e-9


class NonConvexCurveError(ValueError):
    """An allocation input curve fails convexity beyond the tolerance."""


class PiecewiseLinearCurve:
    """Convex non-increasing interpolation of sampled (eps, rate) points."""

    def __init__(self, eps, rates):
        e = np.asarray(eps, dtype=float)
        r = np.asarray(rates, dtype=float)
        if e.ndim != 1 or e.shape != r.shape or e.size < 1:
            raise ValueError("need matching 1-D sample arrays")
        order = np.argsort(e)
        e, r = e[order], r[order]
        keep = np.concatenate([[True], np.diff(e) > 1e-15])
        e, r = e[keep], r[keep]
        if (np.diff(r) > 1e-9).any():
            raise NonConvexCurveError("rates must be non-increasing in eps")
        for i in range(1, e.size - 1):
            lam = (e[i + 1] - e[i]) / (e[i + 1] - e[i - 1])
            chord = lam * r[i - 1] + (1 - lam) * r[i + 1]
            if r[i] > chord + CONVEXITY_TOL:
                raise NonConvexCurveError(
                    f"convexity violated at eps={e[i]}: {r[i]} above chord {chord}")
        self.eps = e
        self.rates = r

    @property
    def eps_min(self) -> float:
        return float(self.eps[0])

    @property
    def eps_max(self) -> float:
        return float(self.eps[-1])

    def value(self, e: float) -> float:
        if e >= self.eps_max:
            return float(self.rates[-1])
        if e < self.eps_min - 1e-12:
            raise ValueError(f"eps={e} below the sampled domain [{self.eps_min}, ...]")
        return float(np.interp(max(e, self.eps_min), self.eps, self.rates))

    def argmin_lagrangian(self, s: float) -> tuple:
        """Interval [lo, hi] of eps minimizing rate(e) + s*e over the domain."""
        phi = self.rates + s * self.eps
        m = phi.min()
        tol = 1e-12 * (1.0 + abs(m))
        idx = np.nonzero(phi <= m + tol)[0]
        return float(self.eps[idx[0]]), float(self.eps[idx[-1]])

    @classmethod
    def from_block_source(cls, src, *, n_slopes: int = 288) -> "PiecewiseLinearCurve":
        eps, rates = sample_curve_by_slope(src.probs, src.rho, n_slopes=n_slopes,
                                           s_min=1.0 / 128, s_max=128.0)
        return cls(eps, rates / src.sites)


@dataclass(frozen=True)
class Allocation:
    """Optimal budget split: per-component eps, value sum w_i R_i(eps_i), slope."""

    eps_per_component: tuple
    value: float
    multiplier: float
    budget: float

    def __post_init__(self):
        spent = sum(self.eps_per_component)  # already weight-scaled by allocate
        if spent > self.budget + 1e-12:
            raise ValueError("allocation exceeds the distortion budget")


def allocate(curves, weights, eps_total: float) -> Allocation:
    """Minimize sum w_i R_i(eps_i) subject to sum w_i eps_i <= eps_total.

    Bisects on the common slope s >= 0; each curve contributes its Lagrangian
    argmin interval, and at the critical slope the two bracket allocations
    are mixed linearly to land on the budget (exact for piecewise-linear
    curves).  Stops once the budget is met within 1e-9.
    """
    curves = [c if isinstance(c, PiecewiseLinearCurve) else PiecewiseLinearCurve(*c)
              for c in curves]
    w = np.asarray([float(x) for x in weights])
    if len(curves) != w.size or w.size == 0:
        raise ValueError("curves and weights must align")
    if (w <= 0).any() or abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be positive and sum to 1")
    if eps_total <= 0:
        raise ValueError("eps budget must be positive")
    floor = float(sum(wi * c.eps_min for wi, c in zip(w, curves)))
    if eps_total < floor - 1e-12:
        raise ValueError(f"budget {eps_total} below the sampled curve domain {floor}")

    def spans(s: float):
        los, his = zip(*(c.argmin_lagrangian(s) for c in curves))
        return (np.asarray(los), np.asarray(his))

    _, hi0 = spans(0.0)
    if float(w @ hi0) <= eps_total + 1e-15:
        eps_vec = hi0
        multiplier = 0.0
    else:
        steepest = max(np.abs(np.diff(c.rates) / np.diff(c.eps)).max(initial=0.0)
                       for c in curves)
        s_lo, s_hi = 0.0, steepest + 1.0
        # Invariant: allocations at slope s_lo spend >= target, at s_hi spend <= target.
        alloc_big, alloc_small = hi0, spans(s_hi)[0]
        eps_vec = None
        for _ in range(200):
            s_mid = 0.5 * (s_lo + s_hi)
            lo_v, hi_v = spans(s_mid)
            b_lo, b_hi = float(w @ lo_v), float(w @ hi_v)
            if b_lo <= eps_total <= b_hi:
                theta = 0.0 if b_hi == b_lo else (eps_total - b_lo) / (b_hi - b_lo)
                eps_vec = lo_v + theta * (hi_v - lo_v)
                break
            if b_hi < eps_total:
                s_hi, alloc_small = s_mid, hi_v
            else:
                s_lo, alloc_big = s_mid, lo_v
            b_small = float(w @ alloc_small)
            if eps_total - b_small <= BUDGET_TOL and b_small <= eps_total:
                eps_vec = alloc_small
                break
            if s_hi - s_lo < 1e-15 * (1.0 + s_hi):
                b_big = float(w @ alloc_big)
                theta = 0.0 if b_big == b_small else (eps_total - b_small) / (b_big - b_small)
                eps_vec = alloc_small + np.clip(theta, 0.0, 1.0) * (alloc_big - alloc_small)
                break
        if eps_vec is None:
            raise RuntimeError("allocation bisection failed to converge")
        multiplier = 0.5 * (s_lo + s_hi)
    spent = float(w @ eps_vec)
    if spent > eps_total:
        eps_vec = eps_vec * (eps_total / spent)
    value = float(sum(wi * c.value(float(e)) for wi, c, e in zip(w, curves, eps_vec)))
    return Allocation(tuple(float(x) for x in w * eps_vec), max(value, 0.0),
                      multiplier, eps_total)


def allocate_exhaustive(curves, weights, eps_total: float,
                        resolution: float = 1e-4) -> float:
    """Projected-grid oracle for the allocation optimum on 2 or 3 components."""
    curves = [c if isinstance(c, PiecewiseLinearCurve) else PiecewiseLinearCurve(*c)
              for c in curves]
    w = [float(x) for x in weights]
    if len(curves) == 1:
        return w[0] * curves[0].value(min(eps_total / w[0], curves[0].eps_max))
    if len(curves) == 2:
        c1, c2 = curves
        w1, w2 = w
        top = min(c1.eps_max, (eps_total - w2 * c2.eps_min) / w1)
        grid = np.arange(c1.eps_min, top + resolution, resolution)
        best = np.inf
        for e1 in grid:
            e2 = min((eps_total - w1 * e1) / w2, c2.eps_max)
            if e2 < c2.eps_min - 1e-12:
                continue
            best = min(best, w1 * c1.value(float(e1)) + w2 * c2.value(float(e2)))
        return float(best)
    if len(curves) == 3:
        c1, c2, c3 = curves
        w1, w2, w3 = w
        best = np.inf
        g1 = np.arange(c1.eps_min, min(c1.eps_max, eps_total / w1) + resolution, resolution)
        for e1 in g1:
            rest = eps_total - w1 * e1
            top = min(c2.eps_max, (rest - w3 * c3.eps_min) / w2)
            g2 = np.arange(c2.eps_min, top + resolution, resolution)
            for e2 in g2:
                e3 = min((rest - w2 * e2) / w3, c3.eps_max)
                if e3 < c3.eps_min - 1e-12:
                    continue
                best = min(best, w1 * c1.value(float(e1)) + w2 * c2.value(float(e2))
                           + w3 * c3.value(float(e3)))
        return float(best)
    raise ValueError("exhaustive search supports 2 or 3 components")


# ---------------------------------------------------------------------------
# Measure mixtures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasureMixture:
    """Finitely supported convex combination of shift systems.

    Components must share the lattice dimension and metric decay.  They
    usually share one alphabet; distinct alphabets are allowed for the
    disjoint-union constructions, where direct block computations are
    replaced by certificate and covering arithmetic.
    """

    components: tuple  # of (weight, ShiftSystem)
    name: str = ""

    def __post_init__(self):
        comps = tuple((float(w), s) for w, s in self.components)
        if not comps:
            raise ValueError("mixture needs at least one component")
        if any(w <= 0 for w, _ in comps):
            raise ValueError("mixture weights must be positive")
        total = sum(w for w, _ in comps)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {total}, not 1 within 1e-12")
        dims = {s.lattice_dim for _, s in comps}
        decays = {s.decay for _, s in comps}
        if len(dims) != 1 or len(decays) != 1:
            raise ValueError("components must share lattice dimension and decay")
        object.__setattr__(self, "components", comps)

    @property
    def weights(self) -> tuple:
        return tuple(w for w, _ in self.components)

    @property
    def systems(self) -> tuple:
        return tuple(s for _, s in self.components)

    def shares_alphabet(self) -> bool:
        alphabets = [s.alphabet for s in self.systems]
        first = alphabets[0]
        return all(a is first or a == first for a in alphabets[1:])

    def as_shift_system(self) -> ShiftSystem:
        if not self.shares_alphabet():
            raise ValueError("components do not share an alphabet; "
                             "use certificate/covering arithmetic instead")
        sys0 = self.systems[0]
        model = MixtureModel(tuple((w, s.model) for w, s in self.components))
        return ShiftSystem(sys0.alphabet, model, sys0.lattice_dim, sys0.decay,
                           name=self.name or "mixture")


@dataclass
class MixtureCheckReport:
    """Sandwich check of the allocation optimum against direct mixture rates."""

    eps: float
    allocation_value: float
    exhaustive_value: float | None
    per_window: list  # (window, direct_rate, lower_ok, upper_ok)
    overhead_bits: float
    tol: float
    eps_per_component: tuple

    @property
    def passed(self) -> bool:
        return all(lo and hi for _, _, lo, hi in self.per_window)

    def to_json_dict(self) -> dict:
        return {
            "eps": self.eps,
            "allocation_value": self.allocation_value,
            "exhaustive_value": self.exhaustive_value,
            "eps_per_component": list(self.eps_per_component),
            "overhead_bits": self.overhead_bits,
            "tol": self.tol,
            "passed": self.passed,
            "per_window": [
                {"L": L, "direct": d, "lower_ok": lo, "upper_ok": hi}
                for L, d, lo, hi in self.per_window
            ],
        }


def component_curves(mix: MeasureMixture, window: int, *, n_slopes: int = 288) -> list:
    """Per-site rate curves of the components at the given window."""
    return [PiecewiseLinearCurve.from_block_source(build_block_source(s, window),
                                                   n_slopes=n_slopes)
            for s in mix.systems]


def mixture_formula_check(mix: MeasureMixture, eps: float, window_set,
                          *, component_window: int | None = None,
                          tol: float = 1e-3, cross_validate: bool = True,
                          ) -> MixtureCheckReport:
    """Verify V(eps) - tol <= R_L(mix)/L^d <= V(eps) + log2(#comp)/L^d + tol.

    V is the allocation optimum over component curves sampled at
    component_window (default: the largest window in the set).
    """
    windows = sorted(int(w) for w in window_set)
    if not windows:
        raise ValueError("window set must be nonempty")
    comp_window = component_window or windows[-1]
    curves = component_curves(mix, comp_window)
    alloc = allocate(curves, mix.weights, eps)
    exh = None
    if cross_validate and len(curves) <= 3:
        exh = allocate_exhaustive(curves, mix.weights, eps)
    mix_system = mix.as_shift_system()
    n_comp = len(mix.components)
    rows = []
    overhead = float(np.log2(n_comp))
    for window in windows:
        src = build_block_source(mix_system, window)
        direct = rate_at_distortion(src.probs, src.rho, eps) / src.sites
        lower_ok = alloc.value - tol <= direct
        upper_ok = direct <= alloc.value + overhead / src.sites + tol
        rows.append((window, direct, bool(lower_ok), bool(upper_ok)))
    return MixtureCheckReport(eps=eps, allocation_value=alloc.value,
                              exhaustive_value=exh, per_window=rows,
                              overhead_bits=overhead, tol=tol,
                              eps_per_component=alloc.eps_per_component)


# ---------------------------------------------------------------------------
# Decomposition experiments
# ---------------------------------------------------------------------------

@dataclass
class ComponentEstimate:
    label: str
    upper: TailEstimate
    lower: TailEstimate
    method: str


@dataclass
class DecompositionReport:
    """Tail dimension statistics of a mixture against its components."""

    t_grid: list
    components: list
    weights: list
    mixture_upper: TailEstimate
    mixture_lower: TailEstimate
    mixture_method: str
    upper_ok: bool = field(init=False)
    lower_ok: bool = field(init=False)
    slack: float = 0.1

    def __post_init__(self):
        mixed_upper = sum(w * c.upper.upper for w, c in zip(self.weights, self.components))
        mixed_lower = sum(w * c.lower.lower for w, c in zip(self.weights, self.components))
        self.upper_ok = self.mixture_upper.upper <= mixed_upper + self.slack
        self.lower_ok = self.mixture_lower.lower >= mixed_lower - self.slack

    @property
    def passed(self) -> bool:
        return self.upper_ok and self.lower_ok

    def to_json_dict(self) -> dict:
        return {
            "t_grid": list(self.t_grid),
            "weights": list(self.weights),
            "components": [
                {"label": c.label, "upper": c.upper.upper, "lower": c.lower.lower,
                 "upper_ratios": list(c.upper.ratios), "lower_ratios": list(c.lower.ratios),
                 "method": c.method}
                for c in self.components
            ],
            "mixture": {"upper": self.mixture_upper.upper,
                        "lower": self.mixture_lower.lower,
                        "upper_ratios": list(self.mixture_upper.ratios),
                        "lower_ratios": list(self.mixture_lower.ratios),
                        "method": self.mixture_method},
            "upper_ok": self.upper_ok,
            "lower_ok": self.lower_ok,
            "passed": self.passed,
        }


def _ba_feasible(sys: ShiftSystem, windows) -> bool:
    alphabet = sys.alphabet
    if not isinstance(alphabet, FiniteMetricSpace):
        return False
    return alphabet.size ** max(windows) <= 512


def _system_bound_samples(sys: ShiftSystem, t_grid, windows, certs) -> tuple:
    """(upper samples, lower samples, method) in bits per site over the t grid.

    Computable systems use their block-rate curve for both tail statistics;
    symbolic systems bracket the rate between covering upper bounds and
    certificate lower bounds.
    """
    eps_grid = [2.0 ** (-t) for t in t_grid]
    if _ba_feasible(sys, windows):
        sources = [build_block_source(sys, w) for w in windows]
        rates = [min(rate_at_distortion(src.probs, src.rho, e) / src.sites
                     for src in sources) for e in eps_grid]
        return rates, rates, "block-rate"
    upper = [entropy_at_scale(sys, e).value for e in eps_grid]
    lower = _cert_samples(certs or [], eps_grid)
    return upper, lower, "covering+certificates"


def _cert_samples(certs, eps_grid) -> list:
    if not certs:
        return [0.0 for _ in eps_grid]
    return [certificate_envelope(certs, e) for e in eps_grid]


def decomposition_experiment(mix: MeasureMixture, t_grid, window_schedule,
                             *, tail_fraction: float = 0.5,
                             certificates: list | None = None,
                             slack: float = 0.1) -> DecompositionReport:
    """Tail-slope comparison of a mixture against its components.

    Small systems are measured by block rates; symbolic systems fall back to
    covering upper bounds and certificate lower bounds.  The report asserts
    the convex-combination directions with the given slack:
        upper(mixture) <= sum w_i upper(component_i) + slack
        lower(mixture) >= sum w_i lower(component_i) - slack
    """
    t_grid = [float(t) for t in t_grid]
    windows = [int(w) for w in window_schedule]
    certs_per = certificates or [[] for _ in mix.components]
    comps = []
    upper_rows = []
    lower_rows = []
    for (w, sys), certs in zip(mix.components, certs_per):
        up, lo, method = _system_bound_samples(sys, t_grid, windows, certs)
        upper_rows.append(up)
        lower_rows.append(lo)
        comps.append(ComponentEstimate(
            label=sys.name or "component",
            upper=tail_ratios(t_grid, up, tail_fraction),
            lower=tail_ratios(t_grid, lo, tail_fraction),
            method=method))
    weights = list(mix.weights)
    eps_grid = [2.0 ** (-t) for t in t_grid]
    if mix.shares_alphabet() and _ba_feasible(mix.systems[0], windows):
        mix_sys = mix.as_shift_system()
        sources = [build_block_source(mix_sys, w) for w in windows]
        mix_rates = [min(rate_at_distortion(src.probs, src.rho, e) / src.sites
                         for src in sources) for e in eps_grid]
        mix_upper = tail_ratios(t_grid, mix_rates, tail_fraction)
        mix_lower = mix_upper
        method = "block-rate"
    else:
        upper = [sum(w * row[i] for w, row in zip(weights, upper_rows))
                 for i in range(len(t_grid))]
        lower = [mixture_certified_lower(weights, certs_per, e) for e in eps_grid]
        lower = [min(lo, up) for lo, up in zip(lower, upper)]
        mix_upper = tail_ratios(t_grid, upper, tail_fraction)
        mix_lower = tail_ratios(t_grid, lower, tail_fraction)
        method = "equal-split covering upper, certificate-allocation lower"
    return DecompositionReport(t_grid=t_grid, components=comps, weights=weights,
                               mixture_upper=mix_upper, mixture_lower=mix_lower,
                               mixture_method=method, slack=slack)
