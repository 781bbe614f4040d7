import itertools

import numpy as np
import pytest

from rdimlab.alphabets import GapSchedule, GappedAlphabet
from rdimlab.constructions import build_gapped_shift, desk_gap_schedule
from rdimlab.dimension import (CoveringInexactError, covering_bounds,
                               covering_number, dimension_report, entropy_at_scale,
                               full_shift_window_count, metric_mean_dim_upper,
                               rdim_estimates, relevant_pad, separation_number,
                               tail_ratios)
from rdimlab.metricspace import FiniteMetricSpace, discrete_space, grid_space
from rdimlab.ratedistortion import (IIDModel, MarkovModel, MixtureModel,
                                    PeriodicModel, ShiftSystem, rd_curve)


def test_covering_three_points():
    sp = discrete_space(3)
    assert covering_number(sp, 0.5) == 3
    assert covering_number(sp, 1.5) == 1
    # ties at exactly eps are excluded: diameter < eps is strict
    assert covering_number(sp, 1.0) == 3


def test_covering_monotone_in_eps():
    sp = grid_space(6)
    counts = [covering_number(sp, eps) for eps in (0.05, 0.2, 0.4, 0.7, 1.2)]
    assert counts == sorted(counts, reverse=True)


def test_covering_disjoint_union_additive():
    # two far-apart triangles: cover splits exactly
    d = np.full((6, 6), 10.0)
    for block in (slice(0, 3), slice(3, 6)):
        sub = d[block, block]
        sub[:] = 1.0
        np.fill_diagonal(sub, 0.0)
        d[block, block] = sub
    sp = FiniteMetricSpace(tuple("abcdef"), d)
    assert covering_number(sp, 0.5) == 6
    assert covering_number(sp, 1.5) == 2
    assert covering_number(sp, 20.0) == 1


def _brute_force_cover(sp: FiniteMetricSpace, eps: float) -> int:
    # oracle: smallest k admitting a partition into k sets of diameter < eps
    adj = sp.dist < eps
    n = sp.size
    for k in range(1, n + 1):
        for assignment in itertools.product(range(k), repeat=n):
            if all(adj[i, j] or assignment[i] != assignment[j]
                   for i in range(n) for j in range(i + 1, n)):
                return k
    return n


def test_covering_bnb_on_nontrivial_graphs():
    rng = np.random.default_rng(0)
    for trial in range(3):
        pts = rng.random((7, 2))
        dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
        sp = FiniteMetricSpace(tuple(f"p{i}" for i in range(7)), dist)
        for eps in (0.2, 0.4, 0.6):
            exact = covering_number(sp, eps, method="bnb")
            lower, upper = covering_bounds(sp, eps)
            assert lower <= exact <= upper
            assert exact == _brute_force_cover(sp, eps)


def test_ultrametric_fast_path_matches_bnb():
    sched = GapSchedule(a=(2, 4, 100), b=(3, 20), truncation=10)
    alphabet = GappedAlphabet(sched)
    space = alphabet.materialize()
    assert space.is_ultrametric()
    for t in (0.5, 1.5, 3.0, 4.5, 6.0, 8.5, 50.0, 120.0):
        eps = 2.0 ** (-t)
        fast = covering_number(space, eps, ultrametric=True)
        bnb = covering_number(space, eps, method="bnb")
        assert fast == bnb == alphabet.covering_count(eps)


def test_entropy_at_scale_full_shift():
    sys = ShiftSystem(discrete_space(4), IIDModel(None))
    se = entropy_at_scale(sys, 0.3)
    assert se.value == pytest.approx(2.0, abs=1e-12)
    assert se.exact
    above = entropy_at_scale(sys, 1.5)
    assert above.value == 0.0


def test_full_shift_window_count_direct_enumeration():
    # Exact finite-window covering count against enumeration at L <= 3.
    alphabet = discrete_space(4)
    decay = 0.5
    eps = 0.3
    pad = relevant_pad(alphabet.diameter(), decay, eps) - 1  # offsets 1..pad matter
    for window in (1, 2, 3):
        count, exact = full_shift_window_count(alphabet, decay, eps, window)
        assert exact
        assert count == 4 ** (window + 2 * pad)
        length = window + 2 * pad
        offsets = np.array([max(0, pad - i, i - (pad + window - 1))
                            for i in range(length)])
        weights = decay ** offsets
        codes = np.array(list(itertools.product(range(4), repeat=length)))
        dist = np.zeros((len(codes), len(codes)))
        for pos in range(length):
            dist = np.maximum(dist, weights[pos]
                              * alphabet.dist[np.ix_(codes[:, pos], codes[:, pos])])
        space = FiniteMetricSpace(tuple(str(i) for i in range(len(codes))), dist)
        assert covering_number(space, eps, ultrametric=True) == count
        assert space.is_ultrametric()


def test_entropy_at_scale_gapped_staircase():
    sys = build_gapped_shift(desk_gap_schedule())
    for t, expected in ((5, 2), (11, 2), (20, 20), (24, 24), (100, 24)):
        se = entropy_at_scale(sys, 2.0 ** (-t))
        assert se.value == pytest.approx(expected, abs=1e-12)


def test_entropy_at_scale_periodic_and_markov():
    pe = entropy_at_scale(ShiftSystem(discrete_space(2), PeriodicModel((0, 1))), 0.3)
    assert pe.value == 0.0 and pe.exact
    mk = entropy_at_scale(
        ShiftSystem(discrete_space(2),
                    MarkovModel([[0.5, 0.5], [1.0, 0.0]], [2 / 3, 1 / 3])), 0.6,
        window_max=3)
    # golden-mean shift: growth rate log2(golden ratio) ~ 0.694 at threshold 0.6
    assert 0.5 < mk.value < 1.0
    assert not mk.exact


def test_mixture_entropy_is_max_of_components():
    mix = ShiftSystem(discrete_space(4),
                      MixtureModel(((0.5, IIDModel([0.5, 0.5, 0.0, 0.0])),
                                    (0.5, IIDModel([0.25, 0.25, 0.25, 0.25])))))
    se = entropy_at_scale(mix, 0.3)
    assert se.value == pytest.approx(2.0, abs=1e-12)


def test_metric_mean_dim_estimates():
    flat = ShiftSystem(discrete_space(4), IIDModel(None))
    est = metric_mean_dim_upper(flat, list(range(10, 101, 10)))
    assert est.upper <= 2.0 / 50 + 1e-12
    point = ShiftSystem(discrete_space(2), IIDModel([1.0, 0.0]))
    est0 = metric_mean_dim_upper(point, [2, 4, 8])
    assert est0.upper == 0.0
    gapped = metric_mean_dim_upper(build_gapped_shift(desk_gap_schedule()),
                                   list(range(12, 25)), tail_fraction=0.5)
    assert est0.upper == 0.0
    assert abs(gapped.upper - 1.0) <= 0.05


def test_metric_mean_dim_needs_three_points():
    sys = ShiftSystem(discrete_space(2), IIDModel(None))
    with pytest.raises(ValueError, match="3 grid points"):
        metric_mean_dim_upper(sys, [2, 3])


def test_rdim_estimates_flat_and_bernoulli():
    sys = ShiftSystem(discrete_space(2), IIDModel([1.0, 0.0]))
    curve = rd_curve(sys, [0.25, 0.125, 0.0625], [1])
    est = rdim_estimates(curve)
    assert est.upper == 0.0 and est.lower == 0.0
    bern = ShiftSystem(discrete_space(2), IIDModel([0.5, 0.5]))
    curve2 = rd_curve(bern, [2.0 ** (-t) for t in range(4, 13)], [1])
    est2 = rdim_estimates(curve2, tail_fraction=0.25)
    assert est2.upper <= 0.1
    assert est2.lower >= 0.0


def test_tail_ratio_errors():
    with pytest.raises(ValueError):
        tail_ratios([], [], 0.5)
    with pytest.raises(ValueError):
        tail_ratios([0.0, 1.0], [1.0, 1.0], 0.5)


def test_rate_below_scale_entropy_on_bundled_systems():
    # covering bound: R(eps) <= S(eps) on every bundled example
    systems = [ShiftSystem(discrete_space(2), IIDModel([0.7, 0.3])),
               ShiftSystem(discrete_space(4), IIDModel(None)),
               ShiftSystem(discrete_space(2),
                           MixtureModel(((0.5, IIDModel([0.9, 0.1])),
                                         (0.5, IIDModel([0.1, 0.9])))))]
    for sys in systems:
        for eps in (0.1, 0.3, 0.6):
            curve = rd_curve(sys, [eps], [1, 2])
            s_val = entropy_at_scale(sys, eps).value
            assert curve.samples[0].rate <= s_val + 1e-6


def test_dimension_report_roundtrip():
    sys = ShiftSystem(discrete_space(2), IIDModel(None))
    curve = rd_curve(sys, [2.0 ** (-t) for t in range(2, 8)], [1])
    report = dimension_report(sys, list(range(2, 8)), curve=curve)
    doc = report.to_json_dict()
    assert doc["S_bits_per_site"] == [1.0] * 6
    assert "rdim_upper" in doc
    csv = report.to_csv()
    assert csv.startswith("t,eps,S_bits_per_site,S_over_t")


def test_covering_bounds_bracket_on_larger_space():
    rng = np.random.default_rng(21)
    pts = rng.random((45, 3))
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    sp = FiniteMetricSpace(tuple(f"p{i}" for i in range(45)), dist)
    for eps in (0.3, 0.5, 0.8):
        lower, upper = covering_bounds(sp, eps)
        assert 1 <= lower <= upper <= 45
        try:
            exact = covering_number(sp, eps)
            assert lower <= exact <= upper
        except CoveringInexactError as err:
            assert err.lower == lower and err.upper == upper


def test_covering_union_submultiplicative_when_close():
    # two triangles at cross distance 0.8: joining across is possible at
    # eps = 1.1, so the union may need fewer sets than the sum, never more
    d = np.full((6, 6), 0.8)
    for block in (slice(0, 3), slice(3, 6)):
        sub = np.full((3, 3), 0.3)
        np.fill_diagonal(sub, 0.0)
        d[block, block] = sub
    sp = FiniteMetricSpace(tuple("abcdef"), d)
    left = FiniteMetricSpace(tuple("abc"), d[:3, :3])
    right = FiniteMetricSpace(tuple("def"), d[3:, 3:])
    for eps in (0.2, 0.5, 0.9, 1.2):
        whole = covering_number(sp, eps, method="bnb")
        parts = covering_number(left, eps) + covering_number(right, eps)
        assert whole <= parts
