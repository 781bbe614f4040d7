"""Blahut-Arimoto rate distortion solver and block sources for shift systems.

A shift system is a symbolic Z^d system: a finite metric alphabet, an
invariant-measure model (i.i.d., Markov, periodic orbit, or finite mixture),
and a weighted sequence metric d(x, y) = sup_n w^|n| d_A(x_n, y_n).

Window-L rates are computed on the exact block law with the averaged
per-coordinate distortion (1/L^d) sum rho_A(x_n, y_n); dividing the block
rate by L^d gives an upper estimate of the per-site rate, which is exact in
the L -> infinity limit and already exact at L = 1 for i.i.d. sources.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .information import entropy_bits
from .metricspace import Distribution, FiniteMetricSpace

STATE_CAP = 2 ** 16
MATRIX_CAP = 8192  # largest block count for which the distortion matrix is materialized

RATE_TOL = 1e-12
GAP_TOL = 5e-8
DISTORTION_TOL = 1e-9
BRACKET_TOL = 1e-12
MAX_BA_ITER = 100_000


class BAConvergenceError(RuntimeError):
    """Alternating minimization failed to converge within the iteration cap."""

    def __init__(self, residual: float, iterations: int):
        super().__init__(
            f"Blahut-Arimoto did not converge in {iterations} iterations "
            f"(last rate change {residual:.3e})")
        self.residual = residual
        self.iterations = iterations


class BlockCapError(ValueError):
    """Raised when a block construction exceeds the configured state cap."""


# ---------------------------------------------------------------------------
# Measure models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IIDModel:
    """Independent letters.  probs=None means uniform over the alphabet."""

    probs: np.ndarray | None = None

    def __post_init__(self):
        if self.probs is not None:
            p = Distribution(np.asarray(self.probs, dtype=float)).probs
            object.__setattr__(self, "probs", p)


@dataclass(frozen=True)
class MarkovModel:
    """Stationary Markov chain (d = 1 only): row-stochastic P with pi P = pi."""

    transition: np.ndarray
    stationary: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.transition, dtype=float)
        pi = Distribution(np.asarray(self.stationary, dtype=float)).probs
        if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape[0] != pi.shape[0]:
            raise ValueError("transition matrix must be square and match the stationary vector")
        if np.abs(p.sum(axis=1) - 1.0).max() > 1e-10:
            raise ValueError("transition rows must sum to 1 within 1e-10")
        if np.abs(pi @ p - pi).max() > 1e-10:
            raise ValueError("stationary vector fails pi P = pi within 1e-10")
        object.__setattr__(self, "transition", p)
        object.__setattr__(self, "stationary", pi)


@dataclass(frozen=True)
class PeriodicModel:
    """Uniform measure on the orbit of one periodic letter sequence (d = 1 only)."""

    word: tuple

    def __post_init__(self):
        w = tuple(int(i) for i in self.word)
        if not w:
            raise ValueError("periodic word must be nonempty")
        object.__setattr__(self, "word", w)


@dataclass(frozen=True)
class MixtureModel:
    """Finite convex combination of models over the same alphabet."""

    components: tuple  # of (weight, model)

    def __post_init__(self):
        comps = tuple((float(w), m) for w, m in self.components)
        if not comps:
            raise ValueError("mixture needs at least one component")
        if any(w <= 0 for w, _ in comps):
            raise ValueError("mixture weights must be positive")
        total = sum(w for w, _ in comps)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {total}, not 1 within 1e-12")
        object.__setattr__(self, "components", comps)


@dataclass(frozen=True)
class ShiftSystem:
    """Full shift over a finite metric alphabet with an invariant-measure model.

    decay is the weight base w of the sequence metric sup_n w^|n| d_A(x_n, y_n).
    """

    alphabet: object
    model: object
    lattice_dim: int = 1
    decay: float = 0.5
    name: str = ""

    def __post_init__(self):
        if self.lattice_dim not in (1, 2):
            raise ValueError("lattice dimension must be 1 or 2")
        if not 0.0 < self.decay < 1.0:
            raise ValueError("metric decay weight must lie in (0,1)")
        if self.lattice_dim == 2 and isinstance(self.model, (MarkovModel, PeriodicModel)):
            raise ValueError("Markov and periodic models support d = 1 only")
        if isinstance(self.model, MixtureModel):
            for _, m in self.model.components:
                if self.lattice_dim == 2 and isinstance(m, (MarkovModel, PeriodicModel)):
                    raise ValueError("Markov and periodic models support d = 1 only")

    @property
    def alphabet_size(self) -> int:
        return self.alphabet.size

    def single_letter_law(self) -> Distribution:
        if self.alphabet_size > 2 ** 20:
            raise ValueError("alphabet too large to materialize a letter law; "
                             "use the symbolic covering/certificate paths")
        return Distribution(_letter_probs(self.model, self.alphabet_size))


def _letter_probs(model, k: int) -> np.ndarray:
    if isinstance(model, IIDModel):
        if model.probs is None:
            return np.full(k, 1.0 / k)
        if model.probs.shape[0] != k:
            raise ValueError("i.i.d. law size does not match alphabet")
        return model.probs
    if isinstance(model, MarkovModel):
        return model.stationary
    if isinstance(model, PeriodicModel):
        p = np.zeros(k)
        for a in model.word:
            p[a] += 1.0 / len(model.word)
        return p
    if isinstance(model, MixtureModel):
        return sum(w * _letter_probs(m, k) for w, m in model.components)
    raise TypeError(f"unknown measure model {type(model)!r}")


# ---------------------------------------------------------------------------
# Block sources
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockSource:
    """Exact law of an L^d window together with the averaged distortion matrix."""

    codes: np.ndarray = field(repr=False)  # (n_blocks, sites) letter indices
    probs: np.ndarray = field(repr=False)
    rho: np.ndarray = field(repr=False)    # (n_blocks, n_blocks) averaged per-coordinate
    window: int
    lattice_dim: int
    alphabet: FiniteMetricSpace

    @property
    def sites(self) -> int:
        return self.window ** self.lattice_dim

    @property
    def n_blocks(self) -> int:
        return self.codes.shape[0]

    def site_marginal(self, site: int = 0) -> np.ndarray:
        k = self.alphabet.size
        out = np.zeros(k)
        np.add.at(out, self.codes[:, site], self.probs)
        return out

    def as_metric_space(self) -> FiniteMetricSpace:
        """Blocks as a finite metric space under the averaged distortion."""
        labels = tuple("|".join(self.alphabet.labels[i] for i in row) for row in self.codes)
        return FiniteMetricSpace(labels, self.rho)


def _block_probs(model, codes: np.ndarray, k: int) -> np.ndarray:
    n, sites = codes.shape
    if isinstance(model, IIDModel):
        p = _letter_probs(model, k)
        return np.prod(p[codes], axis=1)
    if isinstance(model, MarkovModel):
        probs = model.stationary[codes[:, 0]].copy()
        for j in range(sites - 1):
            probs *= model.transition[codes[:, j], codes[:, j + 1]]
        return probs
    if isinstance(model, PeriodicModel):
        w = model.word
        period = len(w)
        probs = np.zeros(n)
        index = {tuple(row): i for i, row in enumerate(codes)}
        for phase in range(period):
            block = tuple(w[(phase + j) % period] for j in range(sites))
            probs[index[block]] += 1.0 / period
        return probs
    if isinstance(model, MixtureModel):
        return sum(wt * _block_probs(m, codes, k) for wt, m in model.components)
    raise TypeError(f"unknown measure model {type(model)!r}")


def build_block_source(sys: ShiftSystem, window: int, *, state_cap: int = STATE_CAP,
                       window_metric_radius: int | None = None) -> BlockSource:
    """Exact block law for an L^d window with averaged per-coordinate distortion.

    window_metric_radius switches the distortion to the truncated sequence
    metric max_{|j| <= r} w^|j| rho_A(x_{n+j}, y_{n+j}) (d = 1 only), used for
    cross-checks of the per-coordinate surrogate at small windows.
    """
    if window < 1:
        raise ValueError("window must be a positive integer")
    k = sys.alphabet_size
    if sys.lattice_dim == 2 and (window > 2 or k > 16):
        raise BlockCapError("two-dimensional lattices support windows up to 2 "
                            "on alphabets of at most 16 letters")
    sites = window ** sys.lattice_dim
    n_blocks = k ** sites
    if n_blocks > state_cap:
        raise BlockCapError(
            f"{k}^{sites} = {n_blocks} block states exceed the cap {state_cap}; "
            "use a smaller window L")
    if n_blocks > MATRIX_CAP:
        raise BlockCapError(
            f"{n_blocks} block states would need a {n_blocks}x{n_blocks} distortion "
            "matrix; use a smaller window L")
    alphabet = sys.alphabet
    if not isinstance(alphabet, FiniteMetricSpace):
        alphabet = alphabet.materialize()
    codes = np.array(list(itertools.product(range(k), repeat=sites)), dtype=np.intp)
    probs = _block_probs(sys.model, codes, k)
    total = probs.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"block law mass {total} drifted from 1")
    probs = probs / total
    d_a = alphabet.dist
    if window_metric_radius is None:
        rho = np.zeros((n_blocks, n_blocks))
        for s in range(sites):
            rho += d_a[np.ix_(codes[:, s], codes[:, s])]
        rho /= sites
    else:
        if sys.lattice_dim != 1:
            raise ValueError("window-metric distortion supports d = 1 only")
        r = int(window_metric_radius)
        rho = np.zeros((n_blocks, n_blocks))
        for n in range(sites):
            site_term = np.zeros((n_blocks, n_blocks))
            for j in range(-r, r + 1):
                if not 0 <= n + j < sites:
                    continue
                weighted = (sys.decay ** abs(j)) * d_a[np.ix_(codes[:, n + j], codes[:, n + j])]
                site_term = np.maximum(site_term, weighted)
            rho += site_term
        rho /= sites
    src = BlockSource(codes=codes, probs=probs, rho=rho, window=window,
                      lattice_dim=sys.lattice_dim, alphabet=alphabet)
    law = sys.single_letter_law().probs
    if np.abs(src.site_marginal(0) - law).max() > 1e-12:
        raise ValueError("1-block marginal drifted from the single-letter law")
    return src


# ---------------------------------------------------------------------------
# Blahut-Arimoto
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BAPoint:
    distortion: float
    rate: float
    kernel: np.ndarray = field(repr=False)
    iterations: int = 0
    output_law: np.ndarray | None = field(default=None, repr=False)
    gap: float = 0.0


def _rate_from_kernel(p: np.ndarray, kernel: np.ndarray) -> float:
    marg = p @ kernel
    joint = p[:, None] * kernel
    mask = joint > 0
    denom = np.outer(p, marg)
    return float(np.sum(joint[mask] * (np.log2(joint[mask]) - np.log2(denom[mask]))))


def blahut_arimoto_slope(probs, rho, s: float, *, tol: float = RATE_TOL,
                         max_iter: int = MAX_BA_ITER, init_q=None,
                         gap_tol: float = GAP_TOL) -> BAPoint:
    """Fixed point of the alternating minimization for I + s E[rho].

    probs: source law over the rows of rho.
    rho:   nonnegative distortion matrix, rows indexed by source letters and
           columns by reproduction letters.
    s:     slope >= 0.  s = 0 returns the zero-rate point directly.

    Iterates on the reproduction law q until either the successive rate
    change drops below tol or the certified optimality gap drops below
    gap_tol; raises BAConvergenceError at the iteration cap.
    """
    p = np.asarray(probs, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if s < 0:
        raise ValueError("slope must be nonnegative")
    if (rho < 0).any() or not np.isfinite(rho).all():
        raise ValueError("distortion matrix must be finite and nonnegative")
    if s == 0.0:
        col = p @ rho
        y = int(np.argmin(col))
        kernel = np.zeros_like(rho)
        kernel[:, y] = 1.0
        return BAPoint(distortion=float(col[y]), rate=0.0, kernel=kernel,
                       iterations=0, output_law=kernel[0].copy())
    w = np.exp2(-s * rho)
    wrho = w * rho
    n_y = rho.shape[1]
    q = np.full(n_y, 1.0 / n_y) if init_q is None else np.asarray(init_q, dtype=float).copy()
    q = np.clip(q, 0.0, None)
    q /= q.sum()
    support = p > 0

    def state(qv: np.ndarray):
        c = w @ qv
        if (c[support] <= 0).any():
            return None
        inv = np.zeros_like(p)
        inv[support] = p[support] / c[support]
        grow = w.T @ inv
        value = float(-np.sum(p[support] * np.log2(c[support])))
        gap = float(np.log2(max(float(grow.max()), 1.0)))
        return c, inv, grow, value, gap

    current = state(q)
    if current is None:
        raise ValueError("a source letter cannot reach any reproduction letter; "
                         "slope too large for this reproduction set")
    prev = np.inf
    residual = np.inf
    boost = 256.0
    for it in range(1, max_iter + 1):
        c, inv, grow, value, gap = current
        d_now = float(inv @ (wrho @ q))
        rate_now = value - s * d_now
        residual = abs(rate_now - prev)
        prev = rate_now
        # Certified exit: 1/(c(x) max_y grow(y)) is a feasible witness for the
        # variational bound, so the Lagrangian optimum lies within
        # log2(max_y grow(y)) of the value at the current q.  The returned
        # kernel is achievable regardless, so its rate overshoots the true
        # curve by at most that gap.
        if gap < gap_tol or residual < tol:
            kernel = np.where(support[:, None], w * q[None, :]
                              / np.where(c[:, None] > 0, c[:, None], 1.0), 0.0)
            # rows off the source support: any stochastic row keeps the kernel valid
            kernel[~support] = q[None, :]
            return BAPoint(distortion=d_now, rate=_rate_from_kernel(p, kernel),
                           kernel=kernel, iterations=it, output_law=q.copy(),
                           gap=gap)
        if it % 16 == 0:
            # Multiplicative extrapolation q * grow^K against harmonic crawls
            # (support collapse and near-degenerate support transitions).
            # Accepted only when the objective does not increase and the
            # certified gap stays controlled, so soundness is untouched.
            logg = np.log(np.maximum(grow, 1e-300))
            cand = q * np.exp(np.clip(boost * logg, -700.0, 700.0))
            total = cand.sum()
            accepted = False
            if np.isfinite(total) and total > 0:
                cand /= total
                nxt = state(cand)
                if nxt is not None and nxt[3] <= value \
                        and nxt[4] <= max(1.5 * gap, 0.5 * gap_tol):
                    q = cand
                    current = nxt
                    boost = min(boost * 2.0, 2.0 ** 60)
                    accepted = True
            if not accepted:
                boost = max(boost / 4.0, 1.0)
            if accepted:
                continue
        q = q * grow
        q /= q.sum()
        current = state(q)
    raise BAConvergenceError(residual, max_iter)


def _revived(q: np.ndarray | None) -> np.ndarray | None:
    """Blend a warm start with the uniform law.

    The multiplicative update cannot resurrect coordinates that a previous
    solve drove to exactly zero, and the optimal support may grow again as
    the slope changes, so continuation reuses the shape of the previous
    optimum but keeps every coordinate alive.
    """
    if q is None:
        return None
    return 0.75 * q + 0.25 / q.shape[0]


def zero_rate_distortion(probs, rho) -> float:
    """Best single-letter reproduction: min_y E rho(X, y)."""
    return float(np.min(np.asarray(probs, dtype=float) @ np.asarray(rho, dtype=float)))


def min_achievable_distortion(probs, rho) -> float:
    return float(np.asarray(probs, dtype=float)
                 @ np.asarray(rho, dtype=float).min(axis=1))


def rate_at_distortion(probs, rho, eps: float, *, tol_d: float = DISTORTION_TOL,
                       bracket_tol: float = BRACKET_TOL) -> float:
    """R(eps): bits needed at average distortion <= eps, by bisection on the slope.

    D(s) is monotone non-increasing in s, so the slope is bisected until the
    achieved distortion is within tol_d of eps or the bracket is below
    bracket_tol; in the latter case (a kink of the curve) the rate is
    interpolated linearly between the two achieved curve points, which is
    exact because the curve is linear across a slope kink.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    p = np.asarray(probs, dtype=float)
    rho = np.asarray(rho, dtype=float)
    cached = _cache_get(p, rho, eps)
    if cached is not None:
        return cached
    d_zero = zero_rate_distortion(p, rho)
    if d_zero <= eps + 1e-12:
        return _cache_put(p, rho, eps, 0.0)
    d_floor = min_achievable_distortion(p, rho)
    if eps <= d_floor - 1e-15:
        raise ValueError(f"eps = {eps} below the minimum achievable distortion {d_floor}")

    s_lo, point_lo = 0.0, BAPoint(d_zero, 0.0, np.zeros((1, 1)))
    s_hi = 1.0
    q = None
    while True:
        point_hi = blahut_arimoto_slope(p, rho, s_hi, init_q=_revived(q))
        q = point_hi.output_law
        if point_hi.distortion <= eps:
            break
        s_lo, point_lo = s_hi, point_hi
        s_hi *= 2.0
        if s_hi > 2.0 ** 70:
            raise RuntimeError("slope expansion failed to reach the target distortion")
    best = point_hi if abs(point_hi.distortion - eps) < abs(point_lo.distortion - eps) \
        else point_lo
    while abs(best.distortion - eps) > tol_d and (s_hi - s_lo) > bracket_tol:
        s_mid = 0.5 * (s_lo + s_hi)
        point_mid = blahut_arimoto_slope(p, rho, s_mid, init_q=_revived(q))
        q = point_mid.output_law
        if point_mid.distortion > eps:
            s_lo, point_lo = s_mid, point_mid
        else:
            s_hi, point_hi = s_mid, point_mid
        if abs(point_mid.distortion - eps) < abs(best.distortion - eps):
            best = point_mid
    if abs(best.distortion - eps) <= tol_d:
        return _cache_put(p, rho, eps, max(best.rate, 0.0))
    # Kink: both bracket points sit on the curve and the arc between is linear.
    d0, r0 = point_lo.distortion, point_lo.rate
    d1, r1 = point_hi.distortion, point_hi.rate
    if abs(d1 - d0) < 1e-300:
        return _cache_put(p, rho, eps, max(min(r0, r1), 0.0))
    rate = r0 + (r1 - r0) * (eps - d0) / (d1 - d0)
    return _cache_put(p, rho, eps, max(rate, 0.0))


def sample_curve_by_slope(probs, rho, *, n_slopes: int = 160,
                          s_min: float = 1.0 / 64, s_max: float = 64.0) -> tuple:
    """Parametric (distortion, rate) samples of the rate distortion curve.

    Sweeps a geometric slope grid with warm starts; every sample is an exact
    curve point, so the piecewise-linear interpolation through them is a
    convex upper approximation with no bisection error.  Endpoints are
    pinned: the zero-rate point and the lossless point (via a huge slope).

    Returns (eps_values increasing, rates).
    """
    p = np.asarray(probs, dtype=float)
    rho = np.asarray(rho, dtype=float)
    pts = [(zero_rate_distortion(p, rho), 0.0)]
    q = None
    for s in np.geomspace(s_min, s_max, n_slopes):
        point = blahut_arimoto_slope(p, rho, float(s), init_q=_revived(q))
        q = point.output_law
        pts.append((point.distortion, point.rate))
    tail = blahut_arimoto_slope(p, rho, 2.0 ** 40)
    pts.append((tail.distortion, tail.rate))
    pts.sort(key=lambda t: t[0])
    # Dedupe near-equal distortions (keep the smaller achievable rate) and
    # monotonize against solver noise; every kept point remains achievable.
    cleaned: list = []
    for d, r in pts:
        if cleaned and d - cleaned[-1][0] <= 1e-14:
            cleaned[-1] = (cleaned[-1][0], min(cleaned[-1][1], r))
        else:
            cleaned.append((d, r))
    rates = np.minimum.accumulate(np.array([r for _, r in cleaned]))
    eps = np.array([d for d, _ in cleaned])
    return eps, rates


# ---------------------------------------------------------------------------
# Window rates and curves
# ---------------------------------------------------------------------------

def r_window(sys: ShiftSystem, window: int, eps: float, *,
             state_cap: int = STATE_CAP) -> float:
    """R_L / L^d on the exact block source: an upper estimate of the per-site rate."""
    src = build_block_source(sys, window, state_cap=state_cap)
    return rate_at_distortion(src.probs, src.rho, eps) / src.sites


r_L = r_window


@dataclass(frozen=True)
class CurveSample:
    eps: float
    rate: float
    window_used: int
    certified: float | None = None

    @property
    def t(self) -> float:
        return float(np.log2(1.0 / self.eps))


@dataclass
class RDCurve:
    """Sampled rate distortion values with monotonicity/convexity invariants."""

    samples: list
    metadata: dict = field(default_factory=dict)

    def validate(self, *, convexity_tol: float = 1e-6, cert_tol: float = 1e-6) -> None:
        by_window: dict = {}
        for s in self.samples:
            by_window.setdefault(s.window_used, []).append(s)
            if s.certified is not None and s.certified > s.rate + cert_tol:
                raise ValueError(
                    f"certified lower bound {s.certified} exceeds rate {s.rate} at eps={s.eps}")
        for window, group in by_window.items():
            group = sorted(group, key=lambda s: s.eps)
            for a, b in zip(group, group[1:]):
                if b.rate > a.rate + 1e-9:
                    raise ValueError(
                        f"rate not non-increasing in eps at window {window}: "
                        f"R({a.eps})={a.rate} < R({b.eps})={b.rate}")
            for a, m, b in zip(group, group[1:], group[2:]):
                lam = (b.eps - m.eps) / (b.eps - a.eps)
                chord = lam * a.rate + (1 - lam) * b.rate
                if m.rate > chord + convexity_tol:
                    raise ValueError(
                        f"convexity violated at window {window}, eps={m.eps}: "
                        f"{m.rate} above chord {chord}")

    def to_csv(self) -> str:
        lines = ["eps,t,R,L_used,certified_lower"]
        for s in self.samples:
            cert = f"{s.certified:.9g}" if s.certified is not None else ""
            lines.append(f"{s.eps:.9g},{s.t:.9g},{s.rate:.9g},{s.window_used},{cert}")
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "metadata": self.metadata,
            "samples": [
                {"eps": s.eps, "t": s.t, "R": s.rate, "L_used": s.window_used,
                 "certified_lower": s.certified}
                for s in self.samples
            ],
        }


def rd_curve(sys: ShiftSystem, eps_grid, window_schedule, *, jobs: int = 1,
             state_cap: int = STATE_CAP, metadata: dict | None = None) -> RDCurve:
    """Curve eps -> min over the window schedule of R_L / L^d.

    The minimum over windows is valid because the true per-site rate is the
    infimum over all windows.  Grid points are independent and evaluated in
    parallel when jobs > 1; assembly order is the grid order regardless.
    """
    eps_grid = [float(e) for e in eps_grid]
    if any(b >= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise ValueError("eps grid must be strictly decreasing")
    windows = [int(w) for w in window_schedule]
    if not windows:
        raise ValueError("window schedule must be nonempty")
    sources = [build_block_source(sys, w, state_cap=state_cap) for w in windows]

    def solve(eps: float) -> CurveSample:
        rates = [rate_at_distortion(src.probs, src.rho, eps) / src.sites
                 for src in sources]
        best = min(rates)
        picked = next(w for w, r in zip(windows, rates) if r <= best + 1e-12)
        return CurveSample(eps=eps, rate=best, window_used=picked)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            samples = list(pool.map(solve, eps_grid))
    else:
        samples = [solve(e) for e in eps_grid]
    curve = RDCurve(samples=samples, metadata=metadata or {"system": sys.name})
    curve.validate()
    return curve


def attach_certificates(curve: RDCurve, certified) -> RDCurve:
    """Return a copy of the curve with certified lower bounds filled in.

    certified: callable eps -> float (bits per site) or a list aligned with
    the samples.
    """
    new = []
    for i, s in enumerate(curve.samples):
        value = certified(s.eps) if callable(certified) else certified[i]
        new.append(CurveSample(s.eps, s.rate, s.window_used,
                               None if value is None else float(value)))
    out = RDCurve(samples=new, metadata=dict(curve.metadata))
    out.validate()
    return out


# ---------------------------------------------------------------------------
# Single-letter entropy helper and optional result cache
# ---------------------------------------------------------------------------

def source_entropy(sys: ShiftSystem) -> float:
    return entropy_bits(sys.single_letter_law().probs)


def _cache_dir() -> str | None:
    return os.environ.get("RDIMLAB_CACHE_DIR") or None


def _cache_key(p: np.ndarray, rho: np.ndarray, eps: float) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(p).tobytes())
    h.update(np.ascontiguousarray(rho).tobytes())
    h.update(np.float64(eps).tobytes())
    return h.hexdigest()


def _cache_get(p, rho, eps):
    root = _cache_dir()
    if root is None:
        return None
    path = os.path.join(root, _cache_key(p, rho, eps) + ".json")
    try:
        with open(path) as fh:
            return float(json.load(fh)["rate"])
    except (OSError, ValueError, KeyError):
        return None


def _cache_put(p, rho, eps, rate: float) -> float:
    root = _cache_dir()
    if root is not None:
        try:
            os.makedirs(root, exist_ok=True)
            path = os.path.join(root, _cache_key(p, rho, eps) + ".json")
            with open(path, "w") as fh:
                json.dump({"rate": rate}, fh)
        except OSError:
            pass
    return rate
