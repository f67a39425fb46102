import math

import numpy as np
import pytest

from fdclass import Grid, model1_population, ou_model
from fdclass.bayes import (
    EqualCovPair,
    EqualMeansPair,
    GeneralPair,
    PluginBayesClassifier,
    PluginClassifier,
    bayes_classify,
    eta,
    eta_from_log,
    grid_density_log_ratio,
    log_rn,
    log_rn_equal_cov,
    log_rn_equal_means,
    log_rn_general,
    rn_equal_cov,
    rn_equal_means,
    rn_general,
)
from fdclass.exceptions import HypothesisError, OracleUnavailableError, ParameterError
from fdclass.gp import BROWNIAN, GPModel, brownian_model, sample_gaussian_paths

SIZES = (11, 51, 201)


def zero_mean(cov):
    return GPModel(lambda t: 0.0 * np.asarray(t), lambda t: 0.0 * np.asarray(t), cov)


def drift(theta):
    return brownian_model(lambda t: theta * np.asarray(t), lambda t: theta + 0.0 * np.asarray(t))


OU0, OU1 = ou_model(0.5, 2.0), ou_model(1.0, 0.5)


def median_oracle_gap(log_ratio, model0, model1, n_nodes, seed):
    g = Grid.equispaced(n_nodes)
    X = sample_gaussian_paths(model0, g, 100, np.random.default_rng(seed))
    gap = np.abs(log_ratio(X, g) - grid_density_log_ratio(X, model0, model1, g))
    return float(np.median(gap))


class TestEqualMeans:
    def test_identical_covariances_give_one(self, rng, grid51):
        pair = EqualMeansPair(OU0, OU0)
        x = rng.normal(size=51)
        assert rn_equal_means(pair, x, grid51) == 1.0

    def test_zero_path_constant(self, grid51):
        value = rn_equal_means(EqualMeansPair(OU0, OU1), np.zeros(51), grid51)
        assert value == pytest.approx(math.sqrt(4 * math.exp(1.5)), rel=1e-12)
        assert value == pytest.approx(4.2340, abs=1e-4)

    def test_oracle_convergence(self):
        pair = EqualMeansPair(OU0, OU1)
        gaps = [
            median_oracle_gap(lambda X, g: log_rn_equal_means(pair, X, g), zero_mean(OU0), zero_mean(OU1), n, 1)
            for n in SIZES
        ]
        assert gaps[0] >= gaps[1] >= gaps[2]
        assert gaps[2] < 1e-3

    def test_mismatched_variance_rates_rejected(self, grid51):
        with pytest.raises(HypothesisError):
            log_rn_equal_means(EqualMeansPair(ou_model(1, 1), ou_model(1, 2)), np.zeros(51), grid51)

    def test_pinned_and_free_start_rejected(self, grid51):
        with pytest.raises(HypothesisError):
            log_rn_equal_means(EqualMeansPair(BROWNIAN, ou_model(1 / math.sqrt(2), 1.0)), np.zeros(51), grid51)

    def test_log_form_survives_huge_paths(self, grid51):
        value = log_rn_equal_means(EqualMeansPair(OU0, OU1), np.full(51, 1e3), grid51)
        assert np.isfinite(value)


class TestEqualCov:
    def test_zero_trend_gives_one(self, rng, grid51):
        pair = EqualCovPair(OU0, lambda t: 0.0 * t, lambda t: 0.0 * t)
        assert rn_equal_cov(pair, rng.normal(size=51), grid51) == 1.0

    def test_girsanov_example(self):
        g = Grid([0.0, 0.3, 0.55, 1.0])
        pair = EqualCovPair(BROWNIAN, lambda t: 1.0 * t, lambda t: 1.0 + 0 * t)
        x = np.array([0.0, -0.4, 0.9, 0.3])
        assert rn_equal_cov(pair, x, g) == pytest.approx(math.exp(-0.2), rel=1e-12)
        assert rn_equal_cov(pair, x, g) == pytest.approx(0.81873, abs=1e-5)

    @pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
    def test_girsanov_exact_on_irregular_grid(self, theta):
        rng = np.random.default_rng(int(theta * 10))
        g = Grid(np.r_[0.0, np.sort(rng.uniform(0, 1, 23)), 1.0])
        model = drift(theta)
        X = sample_gaussian_paths(model, g, 100, rng)
        pair = EqualCovPair(BROWNIAN, model.mean, model.dmean)
        lr = log_rn_equal_cov(pair, X, g)
        assert np.max(np.abs(lr - (theta * X[:, -1] - theta**2 / 2))) < 1e-8
        assert np.max(np.abs(lr - grid_density_log_ratio(X, model, brownian_model(), g))) < 1e-8

    def test_trend_must_vanish_where_pinned(self, grid51):
        pair = EqualCovPair(BROWNIAN, lambda t: 1.0 + 0 * t, lambda t: 0 * t)
        with pytest.raises(HypothesisError):
            log_rn_equal_cov(pair, np.zeros(51), grid51)

    def test_ou_shift_matches_oracle(self):
        mean, dmean = (lambda t: np.sin(3 * t)), (lambda t: 3 * np.cos(3 * t))
        pair = EqualCovPair(OU1, mean, dmean)
        m0 = GPModel(mean, dmean, OU1)
        gaps = [
            median_oracle_gap(lambda X, g: log_rn_equal_cov(pair, X, g), m0, zero_mean(OU1), n, 2)
            for n in SIZES
        ]
        assert gaps[0] >= gaps[1] >= gaps[2]


class TestGeneral:
    def test_identical_models(self, rng, grid51):
        m = model1_population(0)
        assert rn_general(GeneralPair(m, m), rng.normal(size=51), grid51) == 1.0

    def test_equal_covariances_reduce_to_shifts(self, rng, grid51):
        m0, m1 = model1_population(0), model1_population(1)
        x = rng.normal(size=51)
        direct = log_rn_general(GeneralPair(m0, m1), x, grid51)
        via_shifts = log_rn_equal_cov(EqualCovPair(m0.cov, m0.mean, m0.dmean), x, grid51) - log_rn_equal_cov(
            EqualCovPair(m1.cov, m1.mean, m1.dmean), x, grid51
        )
        assert direct == pytest.approx(via_shifts, abs=1e-10)

    def test_model1_oracle_convergence(self):
        m0, m1 = model1_population(0), model1_population(1)
        pair = GeneralPair(m0, m1)
        gaps = [median_oracle_gap(lambda X, g: log_rn_general(pair, X, g), m0, m1, n, 3) for n in SIZES]
        assert gaps[0] >= gaps[1] >= gaps[2]

    def test_mixed_pair_against_oracle(self):
        m0 = GPModel(lambda t: 2 * t * (1 - t), lambda t: 2 - 4 * t, OU0)
        m1 = GPModel(lambda t: np.cos(t), lambda t: -np.sin(t), OU1)
        pair = GeneralPair(m0, m1)
        gaps = [median_oracle_gap(lambda X, g: log_rn_general(pair, X, g), m0, m1, n, 4) for n in SIZES]
        assert gaps[0] >= gaps[1] >= gaps[2]

    def test_dispatch(self, rng, grid51):
        x = rng.normal(size=51)
        pair = EqualMeansPair(OU0, OU1)
        assert log_rn(pair, x, grid51) == log_rn_equal_means(pair, x, grid51)
        with pytest.raises(ParameterError):
            log_rn(object(), x, grid51)


class TestReciprocity:
    def test_equal_means(self, rng, grid51):
        X = sample_gaussian_paths(zero_mean(OU0), grid51, 20, rng)
        a = log_rn_equal_means(EqualMeansPair(OU0, OU1), X, grid51)
        b = log_rn_equal_means(EqualMeansPair(OU1, OU0), X, grid51)
        assert np.max(np.abs(a + b)) < 1e-8

    def test_equal_cov(self, rng, grid51):
        mean, dmean = (lambda t: t**2), (lambda t: 2 * t)
        X = sample_gaussian_paths(zero_mean(OU1), grid51, 20, rng)
        a = log_rn_equal_cov(EqualCovPair(OU1, mean, dmean), X, grid51)
        b = log_rn_general(GeneralPair(zero_mean(OU1), GPModel(mean, dmean, OU1)), X, grid51)
        assert np.max(np.abs(a + b)) < 1e-8

    def test_general(self, rng, grid51):
        m0, m1 = model1_population(0), model1_population(1)
        X = sample_gaussian_paths(m1, grid51, 20, rng)
        a = log_rn_general(GeneralPair(m0, m1), X, grid51)
        b = log_rn_general(GeneralPair(m1, m0), X, grid51)
        assert np.max(np.abs(a + b)) < 1e-8


class TestEta:
    def test_examples(self):
        assert eta(1.0, 0.5) == 0.5
        assert eta(3.0, 0.5) == 0.25
        assert eta(np.inf, 0.5) == 0.0
        assert eta(1e300, 0.5) < 1e-299

    def test_strictly_decreasing_and_bounded(self):
        r = np.sort(np.random.default_rng(0).exponential(size=500))
        for p in (0.1, 0.5, 0.9):
            e = eta(r, p)
            assert np.all((0 <= e) & (e <= 1))
            assert np.all(np.diff(e) < 0)

    def test_log_form_agrees(self):
        r = np.geomspace(1e-5, 1e5, 41)
        np.testing.assert_allclose(eta_from_log(np.log(r), 0.3), eta(r, 0.3), rtol=1e-12)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1])
    def test_prior_range(self, p):
        with pytest.raises(ParameterError):
            eta(1.0, p)
        with pytest.raises(ParameterError):
            PluginClassifier(EqualMeansPair(OU0, OU0), p)



def classify_at_ratio(r, p):
    # Brownian pair with trend theta t, path through x(1): log r = theta x(1) - theta^2/2
    g = Grid([0.0, 1.0])
    pair = EqualCovPair(BROWNIAN, lambda t: 1.0 * t, lambda t: 1.0 + 0 * t)
    x = np.array([0.0, math.log(r) + 0.5])
    return bayes_classify(x, PluginClassifier(pair, p), g)


class TestBayesClassify:
    def test_examples(self):
        assert classify_at_ratio(1.0, 0.5) == 0
        assert classify_at_ratio(0.5, 0.5) == 1
        assert classify_at_ratio(0.5, 0.9) == 0

    def test_prior_and_ratio_flip(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            r = float(np.exp(rng.normal(scale=2)))
            p = float(rng.uniform(0.05, 0.95))
            if abs(math.log(r) - math.log((1 - p) / p)) < 1e-6:
                continue
            assert classify_at_ratio(r, p) == 1 - classify_at_ratio(1 / r, 1 - p)

    def test_vectorized(self, grid51):
        m0, m1 = model1_population(0), model1_population(1)
        X = np.vstack([m0.mean_on(grid51.nodes), m1.mean_on(grid51.nodes)])
        labels = bayes_classify(X, PluginClassifier(GeneralPair(m0, m1)), grid51)
        assert labels.tolist() == [0, 1]


class TestGridOracle:
    def test_identical_models_zero(self, rng, grid51):
        m = model1_population(0)
        assert grid_density_log_ratio(rng.normal(size=51), m, m, grid51) == 0.0

    @pytest.mark.parametrize("theta,b", [(1.0, 1.0), (0.7, 2.5)])
    def test_brownian_drift(self, theta, b):
        g = Grid(np.linspace(0, b, 17))
        model = brownian_model(lambda t: theta * np.asarray(t), lambda t: theta + 0 * t, b=b)
        X = sample_gaussian_paths(model, g, 30, np.random.default_rng(1))
        out = grid_density_log_ratio(X, model, brownian_model(b=b), g)
        np.testing.assert_allclose(out, theta * X[:, -1] - theta**2 * b / 2, atol=1e-8)

    def test_single_node_normal(self):
        c = 0.8
        m0 = GPModel(lambda t: 0 * np.asarray(t), lambda t: 0 * np.asarray(t), ou_model(1, 1))
        m1 = GPModel(lambda t: c + 0 * np.asarray(t), lambda t: 0 * np.asarray(t), ou_model(1, 1))
        for x in (-1.0, 0.0, 0.3, 2.0):
            expected = -0.5 * x**2 + 0.5 * (x - c) ** 2
            assert grid_density_log_ratio(np.array([x]), m0, m1, [1.0]) == pytest.approx(expected, abs=1e-12)

    def test_no_nodes_left(self):
        with pytest.raises(OracleUnavailableError):
            grid_density_log_ratio(np.array([0.0]), brownian_model(), brownian_model(), [0.0])


class TestPluginEstimator:
    def test_prior_from_class_proportions(self, grid51):
        m0, m1 = model1_population(0), model1_population(1)
        X = sample_gaussian_paths(m0, grid51, 4, np.random.default_rng(0))
        est = PluginBayesClassifier(m0, m1).fit(X, [0, 0, 0, 1])
        assert est.prior_ == 0.75

    def test_matches_functional_rule(self, grid51):
        m0, m1 = model1_population(0), model1_population(1)
        rng = np.random.default_rng(5)
        X = np.vstack([sample_gaussian_paths(m, grid51, 25, rng) for m in (m0, m1)])
        y = np.repeat([0, 1], 25)
        est = PluginBayesClassifier(m0, m1, prior=0.5).fit(X, y)
        expected = bayes_classify(X, PluginClassifier(GeneralPair(m0, m1), 0.5), grid51)
        assert np.array_equal(est.predict(X), expected)
        proba = est.predict_proba(X)
        np.testing.assert_allclose(proba.sum(axis=1), 1.0)
        assert np.array_equal(proba[:, 1] > 0.5, expected == 1)
