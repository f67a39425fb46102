import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fdclass import Grid, LabeledSample, SplineSmoother, l2_distance, smooth_spline, sup_distance
from fdclass.core import (
    cross_distances,
    nearest_rank,
    pairwise_distance_percentile,
    pairwise_distances,
)
from fdclass.exceptions import DimensionError, InsufficientDataError, ParameterError

from .conftest import constant_curves


class TestGrid:
    def test_equispaced_endpoints(self):
        g = Grid.equispaced(51)
        assert g.a == 0.0 and g.b == 1.0 and g.n_nodes == 51

    @pytest.mark.parametrize("nodes", [[0.0], [0.0, 0.5, 0.25], [0.0, 0.0, 1.0], [0.0, np.nan]])
    def test_rejects_bad_nodes(self, nodes):
        with pytest.raises(DimensionError):
            Grid(nodes)

    def test_trapezoid_weights_integrate_linear_exactly(self, rng):
        g = Grid(np.sort(np.r_[0.0, rng.uniform(0, 2, 20), 2.0]))
        assert g.weights.sum() == pytest.approx(2.0, abs=1e-14)
        assert g.weights @ g.nodes == pytest.approx(2.0, abs=1e-13)


class TestLabeledSample:
    def test_class_counts(self, grid51, rng):
        s = LabeledSample(grid51, rng.normal(size=(5, 51)), [0, 1, 1, 0, 1])
        assert s.class_counts == (2, 3)
        assert sum(s.class_counts) == len(s)

    def test_length_mismatch(self, grid51):
        with pytest.raises(DimensionError):
            LabeledSample(grid51, np.zeros((3, 51)), [0, 1])

    def test_wrong_grid(self, grid51):
        with pytest.raises(DimensionError):
            LabeledSample(grid51, np.zeros((3, 50)), [0, 1, 0])

    def test_non_binary_labels(self, grid51):
        with pytest.raises(ParameterError):
            LabeledSample(grid51, np.zeros((2, 51)), [0, 2])


class TestSupDistance:
    def test_max_abs(self):
        g = Grid([0.0, 0.5, 1.0])
        assert sup_distance([1.0, -3.0, 2.0], [0.0, 0.0, 0.0], g) == 3.0

    def test_identity(self, grid51, rng):
        x = rng.normal(size=51)
        assert sup_distance(x, x, grid51) == 0.0

    @pytest.mark.parametrize("n", [2, 7, 51])
    def test_linear_curve(self, n):
        g = Grid.equispaced(n)
        assert sup_distance(g.nodes, np.zeros(n), g) == 1.0

    def test_length_mismatch(self, grid51):
        with pytest.raises(DimensionError):
            sup_distance(np.zeros(51), np.zeros(50), grid51)


class TestL2Distance:
    @pytest.mark.parametrize("n", [2, 11, 51])
    def test_constant(self, n):
        g = Grid.equispaced(n)
        assert l2_distance(np.ones(n), np.zeros(n), g) == pytest.approx(1.0, abs=1e-15)

    def test_identity(self, grid51, rng):
        x = rng.normal(size=51)
        assert l2_distance(x, x, grid51) == 0.0

    def test_linear_curve_trapezoid_value(self):
        # exact rational trapezoid sum of t^2 on 101 nodes
        h = Fraction(1, 100)
        t = [k * h for k in range(101)]
        exact = sum((t[k] ** 2 + t[k + 1] ** 2) * h / 2 for k in range(100))
        assert exact == Fraction(1, 3) + h**2 / 6
        g = Grid.equispaced(101)
        d = l2_distance(g.nodes, np.zeros(101), g)
        assert d == pytest.approx(math.sqrt(float(exact)), rel=1e-13)
        assert d == pytest.approx(0.57737, abs=1e-5)
        assert abs(d - 1 / math.sqrt(3)) < 1e-4

    def test_length_mismatch(self, grid51):
        with pytest.raises(DimensionError):
            l2_distance(np.zeros(3), np.zeros(51), grid51)


finite = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(arrays(float, (3, 9), elements=finite))
def test_metric_axioms(curves):
    g = Grid.equispaced(9)
    x, y, z = curves
    for dist in (sup_distance, l2_distance):
        dxy, dyz, dxz = dist(x, y, g), dist(y, z, g), dist(x, z, g)
        assert dxy >= 0
        assert dxy == dist(y, x, g)
        assert dxz <= dxy + dyz + 1e-9 * (1 + dxy + dyz)


@settings(max_examples=60, deadline=None)
@given(arrays(float, (2, 12), elements=finite), st.floats(0.1, 5.0))
def test_l2_bounded_by_sup(curves, length):
    g = Grid(np.linspace(-1.0, -1.0 + length, 12))
    x, y = curves
    assert l2_distance(x, y, g) <= sup_distance(x, y, g) * math.sqrt(g.b - g.a) * (1 + 1e-12) + 1e-12


def test_cross_distances_match_pairwise_functions(grid51, rng):
    X, Y = rng.normal(size=(4, 51)), rng.normal(size=(3, 51))
    for metric, fn in (("sup", sup_distance), ("l2", l2_distance)):
        D = cross_distances(X, Y, grid51, metric)
        ref = np.array([[fn(x, y, grid51) for y in Y] for x in X])
        np.testing.assert_allclose(D, ref, rtol=1e-12)


def test_pairwise_matrix_is_symmetric_with_zero_diagonal(grid51, rng):
    D = pairwise_distances(rng.normal(size=(6, 51)), grid51, "l2")
    assert np.array_equal(D, D.T)
    assert np.all(np.diag(D) == 0)


class TestPercentile:
    def test_nearest_rank_three_pairs(self):
        # constants 0, 1, 3 -> pairwise distances {1, 3, 2}; ceil(0.2 * 3) = 1st smallest
        g = Grid.equispaced(5)
        s = (g, constant_curves([0, 1, 3], g))
        assert pairwise_distance_percentile(s, 0.2, "sup") == 1.0
        assert pairwise_distance_percentile(s, 0.5, "sup") == 2.0

    def test_duplicates_give_zero(self):
        g = Grid.equispaced(5)
        s = LabeledSample(g, constant_curves([2, 2, 7], g), [0, 1, 0])
        assert pairwise_distance_percentile(s, 0.1) == 0.0

    @pytest.mark.parametrize("q", [0.0, 1.0, 1.5])
    def test_level_outside_open_interval(self, q):
        g = Grid.equispaced(5)
        with pytest.raises(ParameterError):
            pairwise_distance_percentile((g, constant_curves([0, 1], g)), q)

    def test_needs_two_curves(self):
        g = Grid.equispaced(5)
        with pytest.raises(InsufficientDataError):
            pairwise_distance_percentile((g, constant_curves([0], g)), 0.2)

    def test_exact_integer_rank_not_rounded_up(self):
        # 0.1 * 30 is 3.0000000000000004 in floating point; the rank is still 3
        assert nearest_rank(np.arange(1, 31), 0.1) == 3.0


class TestSpline:
    def test_reproduces_cubic(self, grid51):
        t = grid51.nodes
        x = 2 - 3 * t + 0.5 * t**2 + 4 * t**3
        for size in (4, 8, 12, 51):
            np.testing.assert_allclose(smooth_spline(x, grid51, size), x, atol=1e-8)

    def test_full_basis_has_least_residual(self, rng):
        g = Grid.equispaced(21)
        x = rng.normal(size=21)
        rss = {b: np.sum((smooth_spline(x, g, b) - x) ** 2) for b in range(4, 22)}
        assert rss[21] < 1e-16
        assert all(rss[21] <= r for r in rss.values())

    def test_reduces_total_variation_of_noise(self, grid51, rng):
        x = rng.normal(size=51)
        s = smooth_spline(x, grid51, 51 // 4)
        assert np.abs(np.diff(s)).sum() < np.abs(np.diff(x)).sum()

    def test_idempotent(self, grid51, rng):
        x = rng.normal(size=(3, 51))
        once = smooth_spline(x, grid51, 10)
        np.testing.assert_allclose(smooth_spline(once, grid51, 10), once, atol=1e-10)

    @pytest.mark.parametrize("size", [3, 52])
    def test_basis_size_range(self, grid51, size):
        with pytest.raises(ParameterError):
            smooth_spline(np.zeros(51), grid51, size)

    def test_transformer_matches_function(self, grid51, rng):
        X = rng.normal(size=(5, 51))
        out = SplineSmoother(basis_size=12).fit_transform(X)
        np.testing.assert_allclose(out, smooth_spline(X, grid51, 12), atol=1e-10)
