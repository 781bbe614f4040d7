import numpy as np
import pytest

from rdimlab.alphabets import GapSchedule, GappedAlphabet, ScheduleError
from rdimlab.constructions import (ClusterMixtureParams, build_cluster_shift,
                                   build_gapped_shift, build_interleaved_pair,
                                   build_periodic_discontinuity_demo,
                                   cluster_mixture_certificates,
                                   cluster_mixture_report, desk_gap_schedule,
                                   desk_interleaved_base, gapped_certificates,
                                   glued_cluster_mixture, interleaved_experiment,
                                   random_periodic_model)
from rdimlab.dimension import entropy_at_scale
from rdimlab.ratedistortion import ShiftSystem, build_block_source, rate_at_distortion


def test_cluster_params_validation():
    with pytest.raises(ValueError, match="increasing"):
        ClusterMixtureParams((4, 4))
    with pytest.raises(ValueError, match="at least 2"):
        ClusterMixtureParams((1, 3))
    params = ClusterMixtureParams((2, 3, 4))
    assert sum(params.weights) == pytest.approx(1.0, abs=1e-15)
    assert params.weights[0] == pytest.approx(4.0 / 7.0)


def test_cluster_shift_structure():
    sys = build_cluster_shift(1, 2)
    assert sys.alphabet.size == 4
    assert sys.alphabet.spacing == 1.0
    space = sys.alphabet.materialize()
    off = space.dist[~np.eye(4, dtype=bool)]
    assert np.all(off == 1.0)
    # scale entropy: all letters are distinguishable below the spacing
    assert entropy_at_scale(sys, 0.3).value == pytest.approx(2.0, abs=1e-12)
    assert entropy_at_scale(sys, 1.5).value == 0.0


def test_cluster_rdim_estimate_is_flat():
    from rdimlab.dimension import metric_mean_dim_upper
    sys = build_cluster_shift(2, 4)
    est = metric_mean_dim_upper(sys, list(range(40, 200, 20)))
    assert est.upper <= 0.1


def test_cluster_mixture_report_reference_growth():
    report = cluster_mixture_report(ClusterMixtureParams.reference(2))
    rows = report.to_json_dict()["rows"]
    # weighted closed form at n = 2: (1/3) * (9 - 8 - 1) = 0, certified there
    assert rows[1]["weighted_formula_value"] == pytest.approx(0.0, abs=1e-12)
    assert rows[1]["formula_certified_at_this_eps"]
    assert rows[1]["certified_bits_per_site"] >= 0.0


def test_cluster_mixture_report_desk_growth_increases():
    report = cluster_mixture_report(ClusterMixtureParams.desk(3))
    assert report.strictly_increasing
    vals = [r[2] for r in report.rows]
    assert vals[0] == pytest.approx(0.1032, abs=1e-3)
    assert vals[1] == pytest.approx(6.1905, abs=1e-3)
    assert vals[2] == pytest.approx(10.2381, abs=1e-3)
    assert max(s for _, _, s in report.component_slope_bound) <= 0.1


def test_glued_mixture_certificates_sound():
    params = ClusterMixtureParams((2, 3))
    glued = glued_cluster_mixture(params)
    certs = cluster_mixture_certificates(params)
    from rdimlab.certificates import mixture_certified_lower
    src = build_block_source(glued.as_shift_system(), 1)
    for eps in (0.02, 0.1, 0.3):
        direct = rate_at_distortion(src.probs, src.rho, eps)
        assert mixture_certified_lower(glued.weights, certs, eps) <= direct + 1e-6


def test_gap_schedule_validation_names_constraint():
    with pytest.raises(ScheduleError, match="k\\^2"):
        GapSchedule(a=(2, 12), b=(5, 40), truncation=10)  # 40 <= 4*12
    with pytest.raises(ScheduleError, match="increasing"):
        GapSchedule(a=(5, 4), b=(6,), truncation=4)
    with pytest.raises(ScheduleError, match="truncation"):
        GapSchedule(a=(2, 12), b=(5, 50), truncation=26)  # h beyond c_2 unknown


def test_desk_schedule_h_values():
    sched = desk_gap_schedule()
    assert (sched.h(3), sched.h(20), sched.h(25)) == (12, 20, 240)
    assert sched.h(1) == 1 and sched.h(2) == 2 and sched.h(12) == 12
    assert sched.h(24) == 24 and sched.h(26) == 240
    # constraint margins are exact integer comparisons
    assert sched.b[0] > 1 * sched.a[0]
    assert sched.b[1] > 4 * sched.a[1]
    assert sched.b[2] > 9 * sched.a[2]
    assert [sched.c(k) for k in (1, 2, 3)] == [2, 24, 720]


def test_gapped_alphabet_covering_formula():
    alphabet = GappedAlphabet(desk_gap_schedule())
    # n(t) = min{n : h(n+1) > t}
    assert alphabet.covering_count(2.0 ** -1.5) == 2 ** 1
    assert alphabet.covering_count(2.0 ** -7.0) == 2 ** 2
    for t in range(50, 240, 37):
        assert alphabet.covering_count(2.0 ** -t) == 2 ** 24
    assert alphabet.covering_count(2.0 ** -400.0) == 2 ** 26


def test_gapped_ultrametric_exact_small_and_sampled_large():
    small = GappedAlphabet(GapSchedule(a=(2, 4, 100), b=(3, 20), truncation=10))
    assert small.materialize().is_ultrametric()
    big = GappedAlphabet(desk_gap_schedule())
    rng = np.random.default_rng(12)
    h_vals = np.array([big.h(i) for i in range(1, big.bits + 1)])

    def rho(u, v):
        diff = np.nonzero(u != v)[0]
        return 0.0 if diff.size == 0 else 2.0 ** (-h_vals[diff[0]])

    for _ in range(300):
        x, y, z = rng.integers(0, 2, size=(3, big.bits))
        assert rho(x, z) <= max(rho(x, y), rho(y, z)) + 1e-15


def test_interleaved_pair_constraints():
    base = desk_interleaved_base()
    s1, s2 = build_interleaved_pair(base)
    sched1 = s1.alphabet.schedule
    sched2 = s2.alphabet.schedule
    assert sched1.a == (2, 15, 400) and sched1.b == (5, 90, 4000)
    assert sched2.a == (5, 90, 4000) and sched2.b == (15, 400, 40000)
    # complementary gaps: where one covering staircase is flat the other climbs
    a1 = s1.alphabet
    a2 = s2.alphabet
    assert a1.prefix_depth(2.0 ** -100) == 30     # inside [b_2, a_3)
    assert a2.prefix_depth(2.0 ** -100) == 100    # inside its staircase
    # a_3 = 150 < 4 * b_2 = 200 violates the interleaving constraint
    with pytest.raises(ScheduleError, match="k\\^2"):
        build_interleaved_pair(GapSchedule(a=(2, 6, 150), b=(5, 50), truncation=14))


def test_interleaved_experiment_numbers():
    report = interleaved_experiment()
    assert report.component_max_certified_slope[0] == pytest.approx(0.8095, abs=1e-3)
    assert report.component_max_certified_slope[1] == pytest.approx(0.9683, abs=1e-3)
    assert report.mixture_upper_max == pytest.approx(0.58333, abs=1e-4)
    for (t, lo), (_, up) in zip(report.mixture_certified_ratios,
                                report.mixture_upper_ratios):
        assert lo <= up + 1e-9


def test_gapped_certificates_attach_only_within_truncation():
    sys = build_gapped_shift(desk_gap_schedule())
    certs = gapped_certificates(sys)
    assert [c.label for c in certs] == ["gapped(c_1=2,L=1)", "gapped(c_2=24,L=1)"]
    assert all(c.verified for c in certs)


def test_random_periodic_model_block_law():
    # uniform over n-periodic window words once the window covers a period
    from rdimlab.metricspace import discrete_space
    model = random_periodic_model(2, 2)
    sys = ShiftSystem(discrete_space(2), model)
    src = build_block_source(sys, 3)
    law = {tuple(c): p for c, p in zip(map(tuple, src.codes), src.probs)}
    for word, mass in law.items():
        periodic = all(word[i] == word[i % 2] for i in range(3))
        assert mass == pytest.approx(0.25 if periodic else 0.0, abs=1e-12)


def test_discontinuity_demo():
    demo = build_periodic_discontinuity_demo(4, (1, 2, 3))
    for n in (1, 2, 3):
        assert demo.marginal_gap(n) == pytest.approx(0.0, abs=1e-9)
    report = demo.report(window=4, eps=1.0 / 64)
    rows = report["periodic"]
    for row in rows:
        assert row["rate_per_site"] <= row["entropy_over_window"] + 1e-9
    # approximating measures compress far below the i.i.d. source
    assert rows[0]["rate_per_site"] < 0.6
    assert report["iid_rate_per_site"] > 1.0
    assert report["iid_certified_lower"] <= report["iid_rate_per_site"] + 1e-6
    assert report["iid_certified_lower"] == pytest.approx(1.0 - 32.0 / 64.0, abs=1e-9)
