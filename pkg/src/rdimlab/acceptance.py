"""The acceptance suite: one callable check per criterion, shared by the CLI
`verify all` subcommand and the pytest acceptance module.

Every check returns a CriterionResult whose report lines are fully
deterministic given the seed (timings are kept out of the lines so repeated
runs are byte-identical).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .certificates import (certified_lower_bound, check_feasibility,
                           cluster_shift_certificate, grid_shift_certificate)
from .constructions import (ClusterMixtureParams, build_cluster_shift,
                            build_gapped_shift, cluster_mixture_report,
                            desk_gap_schedule, gapped_certificates,
                            glued_cluster_mixture, interleaved_experiment)
from .dimension import covering_number, entropy_at_scale
from .information import (binary_entropy, markov_chain_gaps, mutual_information_xy,
                          sample_markov_triple)
from .metricspace import (Distribution, FiniteMetricSpace, discrete_space, new_space,
                          wasserstein, wasserstein_exhaustive)
from .mixture import (MeasureMixture, allocate_exhaustive, component_curves,
                      mixture_formula_check)
from .ratedistortion import (IIDModel, ShiftSystem, build_block_source,
                             r_window, rate_at_distortion, rd_curve)

HAMMING = np.array([[0.0, 1.0], [1.0, 0.0]])


def _fmt(x: float) -> str:
    return f"{x:.9g}"


@dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    lines: list = field(default_factory=list)
    elapsed: float = 0.0

    def header(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.index}: {self.name}"


def _result(index: int, name: str, checks: list, t0: float) -> CriterionResult:
    passed = all(ok for ok, _ in checks)
    return CriterionResult(index=index, name=name, passed=passed,
                           lines=[line for _, line in checks],
                           elapsed=time.monotonic() - t0)


# ---------------------------------------------------------------------------

def criterion_1() -> CriterionResult:
    """Blahut-Arimoto exactness on binary sources with Hamming distortion."""
    t0 = time.monotonic()
    checks = []
    for p in (0.25, 0.5):
        src = np.array([1.0 - p, p])
        for d in (0.01, 0.05, 0.1, 0.2, 0.3, 0.45):
            expected = max(0.0, binary_entropy(p) - binary_entropy(d))
            rate = rate_at_distortion(src, HAMMING, d)
            err = abs(rate - expected)
            checks.append((err <= 1e-6,
                           f"p={p} D={d}: |R - closed form| = {_fmt(err)} <= 1e-06"))
    return _result(1, "Blahut-Arimoto exactness (binary/Hamming)", checks, t0)


def criterion_2(seed: int) -> CriterionResult:
    """Data-processing and concavity/convexity inequality suites."""
    t0 = time.monotonic()
    rng = np.random.default_rng(seed)
    worst_dpi = 0.0
    worst_ci = 0.0
    for _ in range(10_000):
        sizes = tuple(int(x) for x in rng.integers(2, 5, size=3))
        triple = sample_markov_triple(int(rng.integers(0, 2 ** 31)), sizes)
        dpi_slack, ci = markov_chain_gaps(triple)
        worst_dpi = min(worst_dpi, dpi_slack)
        worst_ci = max(worst_ci, abs(ci))
    checks = [
        (worst_dpi >= -1e-10,
         f"10^4 Markov triples: min I(X;Y)-I(X;Z) = {_fmt(worst_dpi)} >= -1e-10"),
        (worst_ci <= 1e-10,
         f"10^4 Markov triples: max |I(X;Z|Y)| = {_fmt(worst_ci)} <= 1e-10"),
    ]
    viol_cav = 0.0
    viol_vex = 0.0
    for _ in range(1_000):
        nx, ny, nz = (int(x) for x in rng.integers(2, 5, size=3))
        m = rng.random(nz) + 1e-3
        m /= m.sum()
        mus = rng.random((nz, nx)) + 1e-3
        mus /= mus.sum(axis=1, keepdims=True)
        nu = rng.random((nx, ny)) + 1e-3
        nu /= nu.sum(axis=1, keepdims=True)
        mixed_mu = m @ mus
        lhs = mutual_information_xy(mixed_mu[:, None] * nu)
        rhs = sum(m[z] * mutual_information_xy(mus[z][:, None] * nu) for z in range(nz))
        viol_cav = max(viol_cav, rhs - lhs)
        nus = rng.random((nz, nx, ny)) + 1e-3
        nus /= nus.sum(axis=2, keepdims=True)
        mu = rng.random(nx) + 1e-3
        mu /= mu.sum()
        mixed_nu = np.einsum("z,zxy->xy", m, nus)
        lhs2 = mutual_information_xy(mu[:, None] * mixed_nu)
        rhs2 = sum(m[z] * mutual_information_xy(mu[:, None] * nus[z]) for z in range(nz))
        viol_vex = max(viol_vex, lhs2 - rhs2)
    checks.append((viol_cav <= 1e-10,
                   f"10^3 source mixtures: concavity violation = {_fmt(viol_cav)} <= 1e-10"))
    checks.append((viol_vex <= 1e-10,
                   f"10^3 channel mixtures: convexity violation = {_fmt(viol_vex)} <= 1e-10"))
    return _result(2, "information inequality suite", checks, t0)


def _bundled_iid_sources() -> list:
    three = new_space(["x0", "x1", "x2"],
                      [[0.0, 0.5, 1.0], [0.5, 0.0, 0.5], [1.0, 0.5, 0.0]])
    return [
        ("binary(0.3)", ShiftSystem(discrete_space(2), IIDModel([0.7, 0.3]))),
        ("triple(0.5,0.3,0.2)", ShiftSystem(three, IIDModel([0.5, 0.3, 0.2]))),
        ("quad uniform", ShiftSystem(discrete_space(4), IIDModel(None))),
    ]


def criterion_3() -> CriterionResult:
    """Single-letterization: window rates of i.i.d. sources match r_1."""
    t0 = time.monotonic()
    checks = []
    for name, sys in _bundled_iid_sources():
        for eps in (0.05, 0.1, 0.2):
            r1 = r_window(sys, 1, eps)
            for window in (2, 3):
                err = abs(r_window(sys, window, eps) - r1)
                checks.append((err <= 1e-6,
                               f"{name} L={window} eps={eps}: |r_L - r_1| = {_fmt(err)} <= 1e-06"))
    return _result(3, "single-letterization of i.i.d. sources", checks, t0)


def bundled_mixtures() -> list:
    sp = discrete_space(2)
    bern = lambda p, nm: ShiftSystem(sp, IIDModel([1.0 - p, p]), name=nm)  # noqa: E731
    return [
        ("half Bern(0.5) + half Bern(0.5)",
         MeasureMixture(((0.5, bern(0.5, "bern05a")), (0.5, bern(0.5, "bern05b"))))),
        ("half Bern(0.1) + half Bern(0.9)",
         MeasureMixture(((0.5, bern(0.1, "bern01")), (0.5, bern(0.9, "bern09"))))),
        ("half Bern(0.5) + half point mass",
         MeasureMixture(((0.5, bern(0.5, "bern05")),
                         (0.5, ShiftSystem(sp, IIDModel([1.0, 0.0]), name="pointmass"))))),
    ]


def criterion_4() -> CriterionResult:
    """Allocation-formula sandwich on the bundled two-component mixtures."""
    t0 = time.monotonic()
    checks = []
    for name, mix in bundled_mixtures():
        curves = component_curves(mix, 3)
        for eps in (0.05, 0.1, 0.2):
            report = mixture_formula_check(mix, eps, (1, 2, 3), component_window=3)
            gap = abs(report.allocation_value
                      - allocate_exhaustive(curves, mix.weights, eps))
            checks.append((gap <= 1e-3,
                           f"{name} eps={eps}: |V - grid search| = {_fmt(gap)} <= 0.001"))
            for window, direct, lo_ok, hi_ok in report.per_window:
                checks.append((lo_ok and hi_ok,
                               f"{name} eps={eps} L={window}: sandwich "
                               f"V-tol <= {_fmt(direct)} <= V + 1/L + tol "
                               f"(V = {_fmt(report.allocation_value)})"))
    return _result(4, "convex-combination sandwich (two-component mixtures)", checks, t0)


def criterion_5() -> CriterionResult:
    """Certificate soundness and feasibility-mode agreement."""
    t0 = time.monotonic()
    checks = []
    # Mode agreement on the 4-letter cluster.
    c_closed = cluster_shift_certificate(1, 2, 1)
    rep_closed = check_feasibility(c_closed, mode="closed_form")
    c_exh = cluster_shift_certificate(1, 2, 1)
    rep_exh = check_feasibility(c_exh, mode="exhaustive")
    gap = abs(rep_closed.margin - rep_exh.margin)
    checks.append((gap <= 1e-12,
                   f"toy cluster |A|=4: |closed-form - exhaustive margin| = {_fmt(gap)} <= 1e-12"))
    checks.append((rep_closed.margin <= 1e-12,
                   f"toy cluster feasibility margin = {_fmt(rep_closed.margin)} <= 0"))
    # Soundness against computable block rates.
    toy = build_cluster_shift(1, 2)
    for window in (1, 2):
        for eps in (0.05, 0.2, 0.45):
            cert = cluster_shift_certificate(1, 2, window)
            check_feasibility(cert)
            bound = certified_lower_bound(cert, eps)
            rate = r_window(toy, window, eps)
            checks.append((bound <= rate + 1e-6,
                           f"cluster(1,2) L={window} eps={eps}: certified {_fmt(bound)} "
                           f"<= rate {_fmt(rate)} + 1e-06"))
    grid_cert = grid_shift_certificate(4, 1)
    check_feasibility(grid_cert)
    from .metricspace import grid_space
    grid_sys = ShiftSystem(grid_space(4), IIDModel(None))
    for eps in (0.01, 0.05):
        bound = certified_lower_bound(grid_cert, eps)
        rate = r_window(grid_sys, 1, eps)
        checks.append((bound <= rate + 1e-6,
                       f"grid(4) eps={eps}: certified {_fmt(bound)} <= rate {_fmt(rate)} + 1e-06"))
    # Mixture certificates against the glued direct rate.
    params = ClusterMixtureParams((2, 3))
    glued = glued_cluster_mixture(params)
    from .certificates import mixture_certified_lower
    from .constructions import cluster_mixture_certificates
    certs = cluster_mixture_certificates(params)
    glued_sys = glued.as_shift_system()
    for eps in (0.05, 0.15):
        src = build_block_source(glued_sys, 1)
        direct = rate_at_distortion(src.probs, src.rho, eps)
        bound = mixture_certified_lower(glued.weights, certs, eps)
        checks.append((bound <= direct + 1e-6,
                       f"glued cluster mixture eps={eps}: certified {_fmt(bound)} "
                       f"<= rate {_fmt(direct)} + 1e-06"))
    return _result(5, "certificate soundness and mode agreement", checks, t0)


def criterion_6() -> CriterionResult:
    """Unbounded-mixture reproduction: reference values and desk growth."""
    t0 = time.monotonic()
    checks = []
    # Reference growth at m = 2: slope/weight integers and the threshold value.
    cert = cluster_shift_certificate(2, 9, 1)
    check_feasibility(cert)
    checks.append((cert.slope == 72.0 and cert.log2_weight == 8.0,
                   f"m=2 reference certificate: a = {_fmt(cert.slope)} (= 4*2*9), "
                   f"log2 lambda = {_fmt(cert.log2_weight)} (= 9-1)"))
    at_design = certified_lower_bound(cert, 1.0 / 9.0)
    checks.append((abs(at_design - 0.0) <= 1e-12,
                   f"m=2 bound at eps=1/9 equals 9-8-1 = 0: got {_fmt(at_design)}"))
    just_below = certified_lower_bound(cert, 1.0 / 9.0 - 1e-9)
    checks.append((just_below >= 0.0,
                   f"m=2 bound for eps<1/9 is >= 0: got {_fmt(just_below)}"))
    m1 = cluster_shift_certificate(1, 3, 1)
    check_feasibility(m1)
    v1 = certified_lower_bound(m1, 1.0 / 3.0)
    checks.append((abs(v1 - (3 - 4 - 1)) <= 1e-12,
                   f"m=1 bound at eps=1/3 equals 3-4-1 = -2 (vacuous): got {_fmt(v1)}"))
    # Desk growth: strictly increasing certified mixture bounds, flat components.
    report = cluster_mixture_report(ClusterMixtureParams.desk(3))
    vals = [row[2] for row in report.rows]
    checks.append((report.strictly_increasing,
                   "desk growth: certified R(mixture, 6^-n) strictly increasing: "
                   + ", ".join(_fmt(v) for v in vals)))
    worst_comp = max(s for _, _, s in report.component_slope_bound)
    checks.append((worst_comp <= 0.1,
                   f"desk growth: component slope bounds at tail <= 0.1 "
                   f"(max = {_fmt(worst_comp)})"))
    return _result(6, "cluster-mixture desk reproduction", checks, t0)


def criterion_7(seed: int) -> CriterionResult:
    """Gapped-shift desk reproduction: coverings, staircase, certified slope."""
    t0 = time.monotonic()
    checks = []
    from .alphabets import GapSchedule, GappedAlphabet
    schedule10 = GapSchedule(a=(2, 12, 240), b=(5, 50, 2200), truncation=10)
    toy = GappedAlphabet(schedule10)
    space = toy.materialize()
    worst = 0
    for t in (0.5, 1.0, 1.5, 2.0, 3.5, 5.0, 8.0, 11.9, 13.0, 120.0):
        formula = toy.covering_count(2.0 ** (-t))
        exact = covering_number(space, 2.0 ** (-t), method="bnb")
        worst = max(worst, abs(formula - exact))
    checks.append((worst == 0,
                   f"desk alphabet truncated to N=10: ultrametric covering formula "
                   f"matches branch-and-bound at all sampled scales (max gap {worst})"))
    schedule = desk_gap_schedule()
    sys = build_gapped_shift(schedule)
    ok_stair = True
    worst_ratio = 0.0
    for k, lo, hi in ((1, 5, 12), (2, 50, 240)):
        for t in range(lo, hi, max(1, (hi - lo) // 12)):
            s_val = entropy_at_scale(sys, 2.0 ** (-t)).value
            ratio = s_val / t
            ok_stair = ok_stair and ratio <= 1.0 / k + 0.05
            worst_ratio = max(worst_ratio, ratio - 1.0 / k)
    checks.append((ok_stair,
                   f"S(2^-t)/t <= 1/k + 0.05 on the gap ranges (worst excess "
                   f"{_fmt(worst_ratio)})"))
    certs = gapped_certificates(sys)
    c2 = next(c for c in certs if "c_2" in c.label)
    slope = certified_lower_bound(c2, 2.0 ** (-24)) / 24.0
    target = (24.0 - np.log2(3.28145) - 4.0) / 24.0
    checks.append((abs(slope - target) <= 1e-3,
                   f"certified slope at t=24: {_fmt(slope)} within 1e-3 of {_fmt(target)}"))
    mc_cert = gapped_certificates(sys, mode="closed_form")[-1]
    mc_report = check_feasibility(mc_cert, mode="monte_carlo",
                                  mc_samples=1_000_000, mc_seed=seed)
    checks.append((mc_report.margin <= 0.0,
                   f"Monte-Carlo feasibility (10^6 samples): empirical integral "
                   f"{_fmt(mc_report.details['empirical'])} within 3 sigma of <= 1"))
    return _result(7, "gapped-shift desk reproduction", checks, t0)


def criterion_8() -> CriterionResult:
    """Interleaved pair: strict convexity gap at desk scale."""
    t0 = time.monotonic()
    report = interleaved_experiment()
    checks = []
    for i, slope in enumerate(report.component_max_certified_slope, start=1):
        checks.append((slope >= 0.75,
                       f"component {i} max certified slope = {_fmt(slope)} >= 0.75"))
    checks.append((report.mixture_upper_max <= 0.5 + 0.1,
                   f"mixture upper slope over common tail grid = "
                   f"{_fmt(report.mixture_upper_max)} <= 0.6"))
    sound = all(lo <= up + 1e-9 for (_, lo), (_, up)
                in zip(report.mixture_certified_ratios, report.mixture_upper_ratios))
    checks.append((sound, "mixture certified lower slopes stay below the upper slopes"))
    return _result(8, "interleaved pair strictness analogue", checks, t0)


def criterion_9(seed: int) -> CriterionResult:
    """Wasserstein exactness and the rate's continuity in the source."""
    t0 = time.monotonic()
    checks = []
    two = discrete_space(2)
    worst2 = 0.0
    rng = np.random.default_rng(seed)
    for _ in range(50):
        a, b = rng.random(), rng.random()
        p = Distribution([a, 1 - a])
        q = Distribution([b, 1 - b])
        worst2 = max(worst2, abs(wasserstein(two, p, q) - abs(a - b)))
    checks.append((worst2 <= 1e-9,
                   f"2-point spaces: max |W - closed form| = {_fmt(worst2)} <= 1e-09"))
    worst4 = 0.0
    for _ in range(10):
        pts = rng.random((4, 2))
        dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
        space = FiniteMetricSpace(tuple(f"p{i}" for i in range(4)), dist)
        p = Distribution(np.diff(np.sort(np.concatenate([[0.0], rng.random(3), [1.0]]))))
        q = Distribution(np.diff(np.sort(np.concatenate([[0.0], rng.random(3), [1.0]]))))
        worst4 = max(worst4, abs(wasserstein(space, p, q)
                                 - wasserstein_exhaustive(space, p, q)))
    checks.append((worst4 <= 1e-9,
                   f"4-point spaces: max |W - vertex enumeration| = {_fmt(worst4)} <= 1e-09"))
    base = 0.3
    devs = []
    for delta in (0.04, 0.02, 0.01):
        dev = 0.0
        for eps in (0.1, 0.2):
            r_base = rate_at_distortion([1 - base, base], HAMMING, eps)
            r_pert = rate_at_distortion([1 - base - delta, base + delta], HAMMING, eps)
            dev = max(dev, abs(r_base - r_pert))
        devs.append(dev)
    ratios = [b / a for a, b in zip(devs, devs[1:])]
    ok = all(0.5 / 4.0 <= r <= 0.5 * 4.0 for r in ratios)
    checks.append((ok,
                   "continuity regression: halving the source perturbation scales the "
                   "rate deviation by " + ", ".join(_fmt(r) for r in ratios)
                   + " (within [1/8, 2])"))
    return _result(9, "Wasserstein exactness and source continuity", checks, t0)


def criterion_10(seed: int) -> CriterionResult:
    """Determinism probe: identical artifacts from identical seeds."""
    t0 = time.monotonic()

    def artifacts() -> str:
        sys = ShiftSystem(discrete_space(2), IIDModel([0.5, 0.5]), name="bern05")
        curve = rd_curve(sys, [2.0 ** (-t) for t in range(2, 7)], [1, 2])
        _, mix = bundled_mixtures()[1]
        report = mixture_formula_check(mix, 0.1, (1, 2))
        c9 = criterion_9(seed)
        return curve.to_csv() + repr(report.to_json_dict()) + "\n".join(c9.lines)

    first, second = artifacts(), artifacts()
    checks = [(first == second,
               f"repeated runs with seed {seed} produce byte-identical artifacts")]
    return _result(10, "determinism", checks, t0)


def run_acceptance(seed: int = 7) -> list:
    return [
        criterion_1(),
        criterion_2(seed),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(seed),
        criterion_8(),
        criterion_9(seed),
        criterion_10(seed),
    ]


def format_report(results: list) -> str:
    lines = []
    for res in results:
        lines.append(res.header())
        lines.extend(f"    {line}" for line in res.lines)
    n_pass = sum(1 for r in results if r.passed)
    lines.append(f"{n_pass}/{len(results)} criteria passed")
    return "\n".join(lines) + "\n"
