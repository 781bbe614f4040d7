import numpy as np
import pytest

from rdimlab.information import binary_entropy
from rdimlab.metricspace import discrete_space
from rdimlab.mixture import (MeasureMixture, NonConvexCurveError,
                             PiecewiseLinearCurve, allocate, allocate_exhaustive,
                             component_curves, decomposition_experiment,
                             mixture_formula_check)
from rdimlab.ratedistortion import IIDModel, ShiftSystem

BINARY = discrete_space(2)


def bern(p, name=""):
    return ShiftSystem(BINARY, IIDModel([1.0 - p, p]), name=name or f"bern{p}")


def halfhalf(a, b):
    return MeasureMixture(((0.5, a), (0.5, b)))


def test_curve_validation_rejects_nonconvex():
    with pytest.raises(NonConvexCurveError):
        PiecewiseLinearCurve([0.0, 0.1, 0.2], [1.0, 0.99, 0.0])
    with pytest.raises(NonConvexCurveError):
        PiecewiseLinearCurve([0.0, 0.1, 0.2], [0.5, 0.7, 0.2])


def test_curve_value_and_lagrangian_interval():
    c = PiecewiseLinearCurve([0.0, 0.1, 0.3], [1.0, 0.5, 0.0])
    assert c.value(0.05) == pytest.approx(0.75)
    assert c.value(0.5) == 0.0
    lo, hi = c.argmin_lagrangian(0.0)
    assert (lo, hi) == (0.3, 0.3)
    lo, hi = c.argmin_lagrangian(100.0)
    assert (lo, hi) == (0.0, 0.0)
    lo, hi = c.argmin_lagrangian(5.0)  # 5 = exact slope of the first segment
    assert lo == pytest.approx(0.0) and hi == pytest.approx(0.1)


def test_mixture_weight_validation():
    with pytest.raises(ValueError, match="sum"):
        MeasureMixture(((0.5, bern(0.5)), (0.4, bern(0.3))))
    with pytest.raises(ValueError, match="positive"):
        MeasureMixture(((1.5, bern(0.5)), (-0.5, bern(0.3))))


def test_allocate_identical_components():
    mix = halfhalf(bern(0.5), bern(0.5))
    curves = component_curves(mix, 1)
    al = allocate(curves, mix.weights, 0.2)
    # symmetry: each component gets the whole budget at its own scale
    assert al.eps_per_component[0] == pytest.approx(0.1, abs=1e-9)
    assert al.eps_per_component[1] == pytest.approx(0.1, abs=1e-9)
    assert al.value == pytest.approx(1.0 - binary_entropy(0.2), abs=1e-3)
    assert sum(al.eps_per_component) <= 0.2 + 1e-12


def test_allocate_zero_curve_absorbs_no_budget():
    mix = halfhalf(bern(0.5), ShiftSystem(BINARY, IIDModel([1.0, 0.0]), name="pm"))
    curves = component_curves(mix, 1)
    al = allocate(curves, mix.weights, 0.1)
    assert al.eps_per_component[1] <= 1e-6
    assert al.value == pytest.approx(0.5 * (1.0 - binary_entropy(0.2)), abs=1e-3)


def test_allocate_matches_exhaustive_grid():
    for mix in (halfhalf(bern(0.5), bern(0.5)),
                halfhalf(bern(0.1), bern(0.9)),
                halfhalf(bern(0.3), bern(0.5))):
        curves = component_curves(mix, 1)
        for eps in (0.05, 0.1, 0.2):
            al = allocate(curves, mix.weights, eps)
            grid = allocate_exhaustive(curves, mix.weights, eps, resolution=1e-4)
            assert al.value == pytest.approx(grid, abs=1e-3)
            assert al.value <= grid + 1e-9  # allocation is the exact optimum


def test_allocate_three_components():
    mix = MeasureMixture(((0.25, bern(0.2)), (0.25, bern(0.5)), (0.5, bern(0.8))))
    curves = component_curves(mix, 1)
    al = allocate(curves, mix.weights, 0.1)
    grid = allocate_exhaustive(curves, mix.weights, 0.1, resolution=2e-3)
    assert al.value <= grid + 1e-9
    assert al.value == pytest.approx(grid, abs=5e-3)


def test_allocation_value_monotone_convex_in_budget():
    mix = halfhalf(bern(0.1), bern(0.9))
    curves = component_curves(mix, 1)
    budgets = np.linspace(0.02, 0.4, 20)
    values = [allocate(curves, mix.weights, float(b)).value for b in budgets]
    assert all(b <= a + 1e-9 for a, b in zip(values, values[1:]))
    for i in range(1, len(values) - 1):
        chord = 0.5 * (values[i - 1] + values[i + 1])
        assert values[i] <= chord + 1e-6


def test_formula_check_single_component_equality():
    mix = MeasureMixture(((1.0, bern(0.3)),))
    report = mixture_formula_check(mix, 0.1, (1, 2))
    assert report.passed
    for _, direct, _, _ in report.per_window:
        assert direct == pytest.approx(report.allocation_value, abs=1e-3)


def test_formula_check_upper_gap_shrinks_with_window():
    mix = halfhalf(bern(0.1), bern(0.9))
    report = mixture_formula_check(mix, 0.05, (1, 2, 3))
    assert report.passed
    gaps = [direct - report.allocation_value for _, direct, _, _ in report.per_window]
    assert gaps[0] > gaps[1] > gaps[2] > -1e-3
    assert gaps[0] <= 1.0 + 1e-3
    assert gaps[2] <= 1.0 / 3.0 + 1e-3


def test_formula_check_point_mass_window():
    mix = halfhalf(bern(0.5), ShiftSystem(BINARY, IIDModel([1.0, 0.0]), name="pm"))
    report = mixture_formula_check(mix, 0.1, (2,))
    assert report.passed
    _, direct, _, _ = report.per_window[0]
    assert report.allocation_value - 1e-3 <= direct <= report.allocation_value + 0.5 + 1e-3


def test_decomposition_equal_components():
    mix = halfhalf(bern(0.3), bern(0.3))
    report = decomposition_experiment(mix, [3, 4, 5, 6], [1, 2])
    assert report.passed
    mixed = sum(w * c.upper.upper for w, c in zip(report.weights, report.components))
    assert abs(report.mixture_upper.upper - mixed) <= 0.05


def test_decomposition_bounded_alphabet_slopes_vanish():
    mix = halfhalf(bern(0.2), bern(0.7))
    report = decomposition_experiment(mix, list(range(8, 15)), [1],
                                      tail_fraction=0.3)
    assert report.mixture_upper.upper <= 0.1
    assert report.passed


def test_decomposition_interleaved_pair_symbolic_path():
    from rdimlab.constructions import (build_interleaved_pair,
                                       desk_interleaved_base, gapped_certificates)
    s1, s2 = build_interleaved_pair(desk_interleaved_base())
    certs = [gapped_certificates(s1), gapped_certificates(s2)]
    mix = MeasureMixture(((0.5, s1), (0.5, s2)))
    report = decomposition_experiment(mix, [30, 180], [1], certificates=certs,
                                      tail_fraction=1.0)
    assert report.mixture_method.startswith("equal-split")
    assert report.passed
    # upper staircase slopes hit 1 at each component's own scale
    assert report.components[0].upper.upper == pytest.approx(1.0)
    assert report.components[1].upper.upper == pytest.approx(1.0)
    # the mixture stays near 1/2 on the common grid
    assert report.mixture_upper.upper == pytest.approx(0.58333, abs=1e-4)
    assert report.mixture_lower.lower <= report.mixture_upper.upper
