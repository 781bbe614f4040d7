import numpy as np
import pytest

from rdimlab.information import binary_entropy
from rdimlab.metricspace import discrete_space
from rdimlab.ratedistortion import (BlockCapError, IIDModel, MarkovModel,
                                    MixtureModel, PeriodicModel, ShiftSystem,
                                    blahut_arimoto_slope, build_block_source,
                                    r_window, rate_at_distortion, rd_curve,
                                    sample_curve_by_slope)

HAMMING = np.array([[0.0, 1.0], [1.0, 0.0]])
BINARY = discrete_space(2)


def bern(p: float) -> ShiftSystem:
    return ShiftSystem(BINARY, IIDModel([1.0 - p, p]), name=f"bern{p}")


# ---------------------------------------------------------------------------
# Blahut-Arimoto
# ---------------------------------------------------------------------------

def test_zero_slope_gives_zero_rate_point():
    pt = blahut_arimoto_slope([0.5, 0.5], HAMMING, 0.0)
    assert pt.rate == 0.0
    assert pt.distortion == pytest.approx(0.5, abs=1e-12)


def test_large_slope_reaches_lossless_limit():
    pt = blahut_arimoto_slope([0.5, 0.5], HAMMING, 1000.0)
    assert pt.distortion == pytest.approx(0.0, abs=1e-9)
    assert pt.rate == pytest.approx(1.0, abs=1e-9)


def test_bernoulli_hamming_closed_form():
    for p in (0.25, 0.5):
        src = np.array([1 - p, p])
        for d in (0.05, 0.1, 0.2):
            expected = binary_entropy(p) - binary_entropy(d)
            got = rate_at_distortion(src, HAMMING, d)
            assert got == pytest.approx(max(expected, 0.0), abs=1e-6)


def test_rate_value_cross_checked_by_channel_grid_search():
    # Independent oracle: minimize I over all 2x2 channels with E rho <= D on
    # a grid of resolution 1e-3; the grid minimum can only overestimate R.
    p = np.array([0.5, 0.5])
    d_target = 0.1
    grid = np.linspace(0.0, 1.0, 1001)
    a, b = np.meshgrid(grid, grid, indexing="ij")  # a = P(1|0), b = P(0|1)
    feasible = p[0] * a + p[1] * b <= d_target + 1e-12
    # joint cells in order (x=0,y=0), (0,1), (1,0), (1,1)
    joint = np.stack([p[0] * (1 - a), p[0] * a, p[1] * b, p[1] * (1 - b)])
    marg_y0 = joint[0] + joint[2]
    marg_y1 = joint[1] + joint[3]
    px = np.array([p[0], p[0], p[1], p[1]])
    denom = np.stack([marg_y0, marg_y1, marg_y0, marg_y1]) * px[:, None, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(joint > 0,
                        np.log2(np.where(joint > 0, joint, 1.0))
                        - np.log2(np.where(denom > 0, denom, 1.0)), 0.0)
    info = (joint * logs).sum(axis=0)
    grid_min = info[feasible].min()
    ba = rate_at_distortion(p, HAMMING, d_target)
    assert ba <= grid_min + 1e-9
    assert grid_min <= ba + 5e-3  # grid resolution slack


def test_zero_rate_region_returns_zero():
    assert rate_at_distortion([0.5, 0.5], HAMMING, 0.5) == 0.0
    assert rate_at_distortion([0.5, 0.5], HAMMING, 0.7) == 0.0
    assert rate_at_distortion([0.25, 0.75], HAMMING, 0.25) == 0.0


def test_rate_at_distortion_rejects_bad_eps():
    with pytest.raises(ValueError):
        rate_at_distortion([0.5, 0.5], HAMMING, 0.0)
    with pytest.raises(ValueError):
        rate_at_distortion([0.5, 0.5], HAMMING, -0.1)


def test_slope_sweep_points_lie_on_the_curve():
    eps, rates = sample_curve_by_slope([0.5, 0.5], HAMMING, n_slopes=60)
    assert eps[0] == pytest.approx(0.0, abs=1e-12)
    assert rates[0] == pytest.approx(1.0, abs=1e-9)
    for e, r in zip(eps[1:-1:7], rates[1:-1:7]):
        if 0 < e < 0.5:
            assert r == pytest.approx(1.0 - binary_entropy(e), abs=1e-7)


# ---------------------------------------------------------------------------
# Block sources
# ---------------------------------------------------------------------------

def test_iid_block_law_is_product():
    src = build_block_source(bern(0.3), 2)
    expected = {(0, 0): 0.49, (0, 1): 0.21, (1, 0): 0.21, (1, 1): 0.09}
    for code, prob in zip(map(tuple, src.codes), src.probs):
        assert prob == pytest.approx(expected[code], abs=1e-12)


def test_periodic_block_law_is_orbit_uniform():
    sys = ShiftSystem(BINARY, PeriodicModel((0, 1)))
    src = build_block_source(sys, 2)
    law = {tuple(c): p for c, p in zip(map(tuple, src.codes), src.probs)}
    assert law[(0, 1)] == pytest.approx(0.5, abs=1e-12)
    assert law[(1, 0)] == pytest.approx(0.5, abs=1e-12)
    assert law[(0, 0)] == 0.0


def test_mixture_block_law_is_linear():
    mix = ShiftSystem(BINARY, MixtureModel(((0.5, IIDModel([0.9, 0.1])),
                                            (0.5, IIDModel([0.2, 0.8])))))
    src = build_block_source(mix, 2)
    a = build_block_source(ShiftSystem(BINARY, IIDModel([0.9, 0.1])), 2)
    b = build_block_source(ShiftSystem(BINARY, IIDModel([0.2, 0.8])), 2)
    assert np.allclose(src.probs, 0.5 * a.probs + 0.5 * b.probs, atol=1e-15)


def test_markov_block_law_is_path_measure():
    p_mat = np.array([[0.9, 0.1], [0.4, 0.6]])
    pi = np.array([0.8, 0.2])
    assert np.allclose(pi @ p_mat, pi)
    sys = ShiftSystem(BINARY, MarkovModel(p_mat, pi))
    src = build_block_source(sys, 3)
    law = {tuple(c): p for c, p in zip(map(tuple, src.codes), src.probs)}
    assert law[(0, 1, 0)] == pytest.approx(0.8 * 0.1 * 0.4, abs=1e-15)


def test_markov_validation():
    with pytest.raises(ValueError, match="rows"):
        MarkovModel([[0.9, 0.2], [0.4, 0.6]], [0.8, 0.2])
    with pytest.raises(ValueError, match="stationary"):
        MarkovModel([[0.9, 0.1], [0.4, 0.6]], [0.5, 0.5])


def test_block_marginal_matches_single_letter_law():
    for sys in (bern(0.3),
                ShiftSystem(BINARY, MarkovModel([[0.9, 0.1], [0.4, 0.6]], [0.8, 0.2])),
                ShiftSystem(BINARY, PeriodicModel((0, 0, 1)))):
        src = build_block_source(sys, 3)
        for site in range(3):
            assert np.abs(src.site_marginal(site)
                          - sys.single_letter_law().probs).max() <= 1e-12


def test_state_cap_errors_mention_window():
    with pytest.raises(BlockCapError, match="smaller window"):
        build_block_source(ShiftSystem(discrete_space(16), IIDModel(None)), 5)


def test_d2_blocks():
    sys = ShiftSystem(BINARY, IIDModel([0.5, 0.5]), lattice_dim=2)
    src = build_block_source(sys, 2)
    assert src.sites == 4
    assert src.n_blocks == 16
    assert r_window(sys, 2, 0.1) == pytest.approx(
        rate_at_distortion([0.5, 0.5], HAMMING, 0.1), abs=1e-6)


# ---------------------------------------------------------------------------
# Window rates and curves
# ---------------------------------------------------------------------------

def test_window_rate_zero_above_diameter():
    assert r_window(bern(0.5), 2, 1.5) == 0.0


def test_covering_bound_on_block_rate():
    # R_L <= log2 of the covering number of blocks under averaged distortion.
    from rdimlab.dimension import covering_number
    src = build_block_source(bern(0.5), 2)
    space = src.as_metric_space()
    for eps in (0.3, 0.6):
        rate = rate_at_distortion(src.probs, src.rho, eps)
        cover = covering_number(space, eps)
        assert rate <= np.log2(cover) + 1e-6


def test_curve_invariants_and_csv():
    curve = rd_curve(bern(0.5), [2.0 ** (-t) for t in range(1, 7)], [1])
    for sample, t in zip(curve.samples, range(1, 7)):
        assert sample.rate == pytest.approx(
            max(0.0, 1.0 - binary_entropy(2.0 ** (-t))), abs=1e-6)
    curve.validate()
    csv = curve.to_csv()
    assert csv.splitlines()[0] == "eps,t,R,L_used,certified_lower"
    assert len(csv.splitlines()) == 7


def test_curve_grid_must_decrease():
    with pytest.raises(ValueError, match="decreasing"):
        rd_curve(bern(0.5), [0.1, 0.2], [1])


def test_point_mass_curve_is_zero():
    sys = ShiftSystem(BINARY, IIDModel([1.0, 0.0]))
    curve = rd_curve(sys, [0.2, 0.1, 0.05], [1, 2])
    assert all(s.rate == 0.0 for s in curve.samples)


def test_curve_jobs_deterministic():
    grid = [2.0 ** (-t) for t in range(2, 8)]
    a = rd_curve(bern(0.3), grid, [1, 2], jobs=1).to_csv()
    b = rd_curve(bern(0.3), grid, [1, 2], jobs=4).to_csv()
    assert a == b


def test_continuity_in_source():
    # continuity regression: smaller source perturbation, smaller rate shift
    devs = []
    for delta in (0.04, 0.02, 0.01):
        dev = 0.0
        for eps in (0.1, 0.2):
            r0 = rate_at_distortion([0.7, 0.3], HAMMING, eps)
            r1 = rate_at_distortion([0.7 - delta, 0.3 + delta], HAMMING, eps)
            dev = max(dev, abs(r0 - r1))
        devs.append(dev)
    assert devs[0] > devs[1] > devs[2]


def test_window_metric_cross_check():
    # The truncated sequence metric dominates the per-coordinate surrogate,
    # so its rates are larger at equal eps and the sandwich direction holds.
    sys = bern(0.5)
    per = build_block_source(sys, 2)
    win = build_block_source(sys, 2, window_metric_radius=1)
    assert (win.rho >= per.rho - 1e-12).all()
    for eps in (0.1, 0.2):
        r_per = rate_at_distortion(per.probs, per.rho, eps)
        r_win = rate_at_distortion(win.probs, win.rho, eps)
        assert r_win >= r_per - 1e-9
        # win distortion at most doubles the per-coordinate distortion here
        assert rate_at_distortion(win.probs, win.rho, 2 * eps) <= r_per + 1e-9


def test_result_cache_roundtrip(tmp_path, monkeypatch):
    monkeypatch.setenv("RDIMLAB_CACHE_DIR", str(tmp_path))
    first = rate_at_distortion([0.5, 0.5], HAMMING, 0.17)
    assert len(list(tmp_path.iterdir())) == 1
    second = rate_at_distortion([0.5, 0.5], HAMMING, 0.17)
    assert first == second


def test_d2_window_guard():
    sys = ShiftSystem(BINARY, IIDModel([0.5, 0.5]), lattice_dim=2)
    with pytest.raises(BlockCapError, match="two-dimensional"):
        build_block_source(sys, 3)


def test_mixture_curve_dominated_by_weighted_average():
    # classification bound: mixture curve <= weighted component curves + 1/minL
    grid = [2.0 ** (-t) for t in range(2, 7)]
    windows = [1, 2]
    mix_sys = ShiftSystem(BINARY, MixtureModel(((0.5, IIDModel([0.9, 0.1])),
                                                (0.5, IIDModel([0.1, 0.9])))))
    mix_curve = rd_curve(mix_sys, grid, windows)
    comp_a = rd_curve(ShiftSystem(BINARY, IIDModel([0.9, 0.1])), grid, windows)
    comp_b = rd_curve(ShiftSystem(BINARY, IIDModel([0.1, 0.9])), grid, windows)
    for m, a, b in zip(mix_curve.samples, comp_a.samples, comp_b.samples):
        avg = 0.5 * a.rate + 0.5 * b.rate
        assert m.rate <= avg + 1.0 / min(windows) + 1e-6


def test_attach_certificates_to_curve():
    from rdimlab.certificates import (certified_lower_bound, check_feasibility,
                                      cluster_shift_certificate)
    from rdimlab.constructions import build_cluster_shift
    sys = build_cluster_shift(1, 2)
    cert = cluster_shift_certificate(1, 2, 1)
    check_feasibility(cert)
    from rdimlab.ratedistortion import attach_certificates
    curve = rd_curve(sys, [0.2, 0.1, 0.05], [1])
    certified = attach_certificates(curve, lambda e: certified_lower_bound(cert, e))
    for s in certified.samples:
        assert s.certified is not None
        assert s.certified <= s.rate + 1e-6
    assert "certified_lower" in certified.to_csv().splitlines()[0]
    assert certified.to_csv().splitlines()[3].split(",")[-1] != ""
