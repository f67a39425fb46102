"""Closed-form density ratios between Gaussian processes with triangular covariance.

For a triangular covariance ``u(min) v(max)`` the rescaled path ``x / v`` is a
time-changed Brownian motion with clock ``r = u / v``.  This makes the
likelihood ratio of two such processes explicit, in three cases:

* equal (zero) means, covariances with a common variance rate
  ``v u' - u v'`` (:func:`log_rn_equal_means`);
* equal covariance, class 0 shifted by a trend ``m`` (:func:`log_rn_equal_cov`);
* both differences at once, as a product of the two kinds of factors
  (:func:`log_rn_general`).

Every ratio is accumulated in the log domain.  Stieltjes integrals against the
bounded-variation integrators are midpoint-weighted node sums, so no stochastic
integral is discretized against increments of the path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import linalg
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_labels, resolve_grid
from .core import Grid
from .exceptions import (
    DimensionError,
    HypothesisError,
    OracleUnavailableError,
    ParameterError,
    SingularCovarianceError,
)
from .gp import ZERO_TOL, GPModel, TriangularCovariance, covariance_matrix, jittered_cholesky

__all__ = [
    "EqualMeansPair",
    "EqualCovPair",
    "GeneralPair",
    "PluginClassifier",
    "log_rn_equal_means",
    "log_rn_equal_cov",
    "log_rn_general",
    "log_rn",
    "rn_equal_means",
    "rn_equal_cov",
    "rn_general",
    "eta",
    "eta_from_log",
    "bayes_classify",
    "grid_density_log_ratio",
    "PluginBayesClassifier",
]

_RATE_FLOOR = 1e-10
_RATE_RTOL = 1e-8


@dataclass(frozen=True)
class EqualMeansPair:
    """Two zero-mean processes that differ only in their triangular covariance."""

    cov0: TriangularCovariance
    cov1: TriangularCovariance


@dataclass(frozen=True)
class EqualCovPair:
    """Shared covariance; class 0 has trend ``mean``, class 1 has mean zero."""

    cov: TriangularCovariance
    mean: object
    dmean: object


@dataclass(frozen=True)
class GeneralPair:
    """Arbitrary means and triangular covariances with a common variance rate."""

    model0: GPModel
    model1: GPModel


Pair = Union[EqualMeansPair, EqualCovPair, GeneralPair]


@dataclass(frozen=True)
class PluginClassifier:
    """A process pair together with the prior ``p = P(Y = 0)``."""

    pair: Pair
    prior: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.prior < 1.0:
            raise ParameterError(f"prior must lie in (0, 1), got {self.prior}")


def _setup(x, g):
    g = Grid.coerce(g)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != g.n_nodes or x.ndim not in (1, 2):
        raise DimensionError(f"path shape {x.shape} does not match a grid of {g.n_nodes} nodes")
    return x, g


def _stieltjes(w, F):
    """Midpoint-weighted sum approximating the integral of ``w`` against ``dF`` (along the last axis)."""
    return ((w[..., 1:] + w[..., :-1]) * 0.5) @ np.diff(F)


def _out(val, x):
    return float(val) if np.ndim(x) == 1 else val


def _log_shift(cov, m, dm, x, t):
    """log dP_{m,Gamma}/dP_{0,Gamma}(x) on nodes ``t``."""
    u, v, du, dv = cov.factors(t)
    rate = v * du - u * dv
    if np.any(v <= 0) or np.min(rate) <= _RATE_FLOOR:
        raise HypothesisError("v and v u' - u v' must stay positive on the grid")
    if abs(u[0]) <= ZERO_TOL:
        if abs(m[0]) > ZERO_TOL:
            raise HypothesisError("trend must vanish at the left endpoint when u(a) = 0")
        d1 = d2 = 0.0
    else:
        d1 = -m[0] ** 2 / (2 * u[0] * v[0])
        d2 = m[0] / (u[0] * v[0])
    drift = (v * dm - m * dv) / rate
    const = d1 - 0.5 * _stieltjes(drift, m / v)
    lin = (d2 - drift[0] / v[0]) * x[..., 0] + drift[-1] / v[-1] * x[..., -1]
    return const + lin - _stieltjes(x / v, drift)


def log_rn_equal_cov(pair, x, g):
    """Log density ratio of ``N(m, Gamma)`` to ``N(0, Gamma)`` at the path ``x``.

    Accepts one path of shape ``(N,)`` or a stack of shape ``(n, N)``.
    """
    x, g = _setup(x, g)
    t = g.nodes
    m = np.asarray(pair.mean(t), dtype=float) * np.ones_like(t)
    dm = np.asarray(pair.dmean(t), dtype=float) * np.ones_like(t)
    return _out(_log_shift(pair.cov, m, dm, x, t), x)


def _check_equal_means(c0, c1, t):
    u0, v0, du0, dv0 = c0.factors(t)
    u1, v1, du1, dv1 = c1.factors(t)
    rate0 = v0 * du0 - u0 * dv0
    rate1 = v1 * du1 - u1 * dv1
    if np.any(v0 <= 0) or np.any(v1 <= 0):
        raise HypothesisError("v_0 and v_1 must be positive on the grid")
    if np.min(rate1) <= _RATE_FLOOR:
        raise HypothesisError("v_1 u_1' - u_1 v_1' must be bounded away from zero")
    if np.any(np.abs(rate1 - rate0) > _RATE_RTOL * np.maximum(np.abs(rate1), np.abs(rate0))):
        raise HypothesisError("the two covariances must share the variance rate v u' - u v'")
    if (abs(u0[0]) <= ZERO_TOL) != (abs(u1[0]) <= ZERO_TOL):
        raise HypothesisError("u_0(a) and u_1(a) must vanish together")
    return u0, v0, dv0, u1, v1, dv1, rate1


def _log_cov_change(c0, c1, x, t):
    """log dP_{0,Gamma_0}/dP_{0,Gamma_1}(x) on nodes ``t``."""
    u0, v0, dv0, u1, v1, dv1, rate = _check_equal_means(c0, c1, t)
    f = (v1 * dv0 - v0 * dv1) / rate
    if abs(u0[0]) <= ZERO_TOL:
        log_c1 = 0.5 * np.log(v0[0] * v1[-1] / (v0[-1] * v1[0]))
        c2 = 0.0
    else:
        log_c1 = 0.5 * np.log(u1[0] * v1[-1] / (v0[-1] * u0[0]))
        c2 = (u0[0] * v0[0] - u1[0] * v1[0]) / (u0[0] * v0[0] * u1[0] * v1[0])
    vv = v0 * v1
    c3 = c2 - f[0] / vv[0]
    c4 = f[-1] / vv[-1]
    quad = c3 * x[..., 0] ** 2 + c4 * x[..., -1] ** 2 - _stieltjes(x**2 / vv, f)
    return log_c1 + 0.5 * quad


def log_rn_equal_means(pair, x, g):
    """Log density ratio of two zero-mean triangular-covariance processes at ``x``."""
    x, g = _setup(x, g)
    return _out(_log_cov_change(pair.cov0, pair.cov1, x, g.nodes), x)


def log_rn_general(pair, x, g):
    """Log density ratio for arbitrary means and covariances.

    Chain rule through the zero-mean processes::

        dP(m0,G0)/dP(m1,G1) = dP(m0,G0)/dP(0,G0) * dP(0,G0)/dP(0,G1) * dP(0,G1)/dP(m1,G1)
    """
    x, g = _setup(x, g)
    t = g.nodes
    m0, m1 = pair.model0, pair.model1
    out = _log_shift(m0.cov, m0.mean_on(t), m0.dmean_on(t), x, t)
    out = out + _log_cov_change(m0.cov, m1.cov, x, t)
    out = out - _log_shift(m1.cov, m1.mean_on(t), m1.dmean_on(t), x, t)
    return _out(out, x)


def log_rn(pair, x, g):
    """Dispatch to the log density ratio matching the pair type."""
    if isinstance(pair, EqualMeansPair):
        return log_rn_equal_means(pair, x, g)
    if isinstance(pair, EqualCovPair):
        return log_rn_equal_cov(pair, x, g)
    if isinstance(pair, GeneralPair):
        return log_rn_general(pair, x, g)
    raise ParameterError(f"unknown pair type {type(pair).__name__}")


def rn_equal_means(pair, x, g):
    return np.exp(log_rn_equal_means(pair, x, g))


def rn_equal_cov(pair, x, g):
    return np.exp(log_rn_equal_cov(pair, x, g))


def rn_general(pair, x, g):
    return np.exp(log_rn_general(pair, x, g))


def eta(r, p):
    """P(Y = 1 | X = x) from the density ratio ``r = dmu_0/dmu_1(x)`` and ``p = P(Y = 0)``."""
    if not 0.0 < p < 1.0:
        raise ParameterError(f"prior must lie in (0, 1), got {p}")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ParameterError("density ratio must be nonnegative")
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.where(np.isinf(r), 0.0, (1 - p) / (p * r + 1 - p))
    return float(out) if out.ndim == 0 else out


def eta_from_log(log_r, p):
    """:func:`eta` computed from ``log r`` without overflow."""
    if not 0.0 < p < 1.0:
        raise ParameterError(f"prior must lie in (0, 1), got {p}")
    out = expit(-(np.asarray(log_r, dtype=float) + np.log(p / (1 - p))))
    return float(out) if out.ndim == 0 else out


def _label_from_log(log_r, p):
    # eta > 1/2  <=>  r < (1 - p) / p ; equality goes to class 0
    return (np.asarray(log_r) < np.log((1 - p) / p)).astype(int)


def bayes_classify(x, c, g):
    """Plug-in Bayes label of path(s) ``x`` under the classifier ``c``."""
    labels = _label_from_log(log_rn(c.pair, x, g), c.prior)
    return int(labels) if labels.ndim == 0 else labels


def _logpdf(x, mean, K):
    try:
        L = jittered_cholesky(K)
    except SingularCovarianceError as exc:
        raise OracleUnavailableError(str(exc)) from exc
    z = linalg.solve_triangular(L, (x - mean).T, lower=True)
    return -0.5 * np.sum(z * z, axis=0) - np.sum(np.log(np.diag(L)))


def grid_density_log_ratio(x, model0, model1, g):
    """Log ratio of the two N-variate normal densities of the discretized path.

    The left node is dropped when either process is pinned there (``Gamma(a, a) = 0``).
    ``g`` may be a :class:`Grid` or any node array, including a single node.
    """
    t = g.nodes if isinstance(g, Grid) else np.asarray(g, dtype=float).ravel()
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != t.size:
        raise DimensionError(f"path shape {x.shape} does not match {t.size} nodes")
    K0 = covariance_matrix(model0.cov, t)
    K1 = covariance_matrix(model1.cov, t)
    if min(K0[0, 0], K1[0, 0]) <= ZERO_TOL:
        t, x, K0, K1 = t[1:], x[..., 1:], K0[1:, 1:], K1[1:, 1:]
        if t.size == 0:
            raise OracleUnavailableError("no nodes left after dropping the pinned endpoint")
    X = np.atleast_2d(x)
    out = _logpdf(X, model0.mean_on(t), K0) - _logpdf(X, model1.mean_on(t), K1)
    return float(out[0]) if x.ndim == 1 else out


class PluginBayesClassifier(ClassifierMixin, BaseEstimator):
    """Bayes rule with the exact conditional probability of two known Gaussian processes.

    Nothing is learned from the curves; ``fit`` only records the class prior
    (unless ``prior`` is given) and the grid.

    Parameters
    ----------
    model0, model1 : GPModel
        Distributions of ``X | Y = 0`` and ``X | Y = 1``.
    prior : float, optional
        ``P(Y = 0)``.  Defaults to the class-0 proportion seen in ``fit``.
    grid : Grid or array-like, optional
        Observation nodes.  Defaults to equispaced nodes on ``[model0.a, model0.b]``.
    """

    def __init__(self, model0=None, model1=None, prior=None, grid=None):
        self.model0 = model0
        self.model1 = model1
        self.prior = prior
        self.grid = grid

    def fit(self, X, y):
        if self.model0 is None or self.model1 is None:
            raise ParameterError("both class models are required")
        X, y = check_labels(X, y)
        self.classes_ = np.array([0, 1])
        self.grid_ = resolve_grid(self.grid, X.shape[1], self.model0.a, self.model0.b)
        self.n_features_in_ = X.shape[1]
        if self.prior is None:
            n0 = int(np.sum(y == 0))
            self.prior_ = n0 / y.size
        else:
            self.prior_ = float(self.prior)
        PluginClassifier(GeneralPair(self.model0, self.model1), self.prior_)
        return self

    def decision_function(self, X):
        """``log dmu_0/dmu_1`` at each curve (small values favour class 1)."""
        check_is_fitted(self)
        X = self.grid_.check_curves(np.atleast_2d(X))
        return log_rn_general(GeneralPair(self.model0, self.model1), X, self.grid_)

    def predict_proba(self, X):
        p1 = eta_from_log(self.decision_function(X), self.prior_)
        return np.column_stack([1 - p1, p1])

    def predict(self, X):
        return _label_from_log(self.decision_function(X), self.prior_)
