"""k-nearest-neighbour and moving-window classification of curves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_curves, check_labels, resolve_grid
from .core import LabeledSample, MetricKind, cross_distances
from .exceptions import ParameterError

__all__ = [
    "KnnConfig",
    "MwrConfig",
    "neighbor_order",
    "knn_eta",
    "knn_classify",
    "mwr_classify",
    "KNeighborsCurveClassifier",
    "MovingWindowClassifier",
]


@dataclass(frozen=True)
class KnnConfig:
    k: int
    metric: MetricKind = MetricKind.SUP

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ParameterError(f"k must be a positive integer, got {self.k}")
        object.__setattr__(self, "metric", MetricKind.coerce(self.metric))


@dataclass(frozen=True)
class MwrConfig:
    h: float
    metric: MetricKind = MetricKind.SUP

    def __post_init__(self):
        if not self.h > 0:
            raise ParameterError(f"window radius must be positive, got {self.h}")
        object.__setattr__(self, "metric", MetricKind.coerce(self.metric))


def neighbor_order(D):
    """Column indices of each row of ``D`` sorted by distance, ties by lower index."""
    return np.argsort(D, axis=-1, kind="stable")


def _knn_eta_from_distances(D, y, k):
    if k > D.shape[1]:
        raise ParameterError(f"k={k} exceeds the training sample size {D.shape[1]}")
    idx = neighbor_order(D)[:, :k]
    return y[idx].mean(axis=1)


def _mwr_from_distances(D, y, h):
    inside = D <= h
    n1 = np.sum(inside & (y == 1), axis=1)
    n0 = np.sum(inside & (y == 0), axis=1)
    return (n1 > n0).astype(int)


def _query(x, s):
    x = s.grid.check_curves(x, "x")
    return x, np.atleast_2d(x)


def knn_eta(x, s, cfg):
    """Fraction of label-1 curves among the ``k`` training curves nearest to ``x``."""
    x, X = _query(x, s)
    out = _knn_eta_from_distances(cross_distances(X, s.X, s.grid, cfg.metric), s.y, cfg.k)
    return float(out[0]) if x.ndim == 1 else out


def knn_classify(x, s, cfg):
    """k-NN label: 1 only if strictly more than half of the neighbours are labelled 1."""
    out = (np.asarray(knn_eta(x, s, cfg)) > 0.5).astype(int)
    return int(out) if out.ndim == 0 else out


def mwr_classify(x, s, cfg):
    """Moving-window label: majority within the closed ball of radius ``h``; ties go to 0."""
    x, X = _query(x, s)
    out = _mwr_from_distances(cross_distances(X, s.X, s.grid, cfg.metric), s.y, cfg.h)
    return int(out[0]) if x.ndim == 1 else out


class _DistanceClassifier(ClassifierMixin, BaseEstimator):
    def fit(self, X, y):
        X, y = check_labels(X, y)
        self.grid_ = resolve_grid(self.grid, X.shape[1])
        self.sample_ = LabeledSample(self.grid_, X, y)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def _distances(self, X):
        check_is_fitted(self)
        X = check_curves(X, self.grid_)
        return cross_distances(X, self.sample_.X, self.grid_, self.metric)


class KNeighborsCurveClassifier(_DistanceClassifier):
    """k-NN classifier for curves under the sup or L2 distance.

    Parameters
    ----------
    n_neighbors : int, default=5
    metric : {'sup', 'l2'}, default='sup'
    grid : Grid or array-like, optional
        Observation nodes; equispaced on ``[0, 1]`` when omitted.
    """

    def __init__(self, n_neighbors=5, metric="sup", grid=None):
        self.n_neighbors = n_neighbors
        self.metric = metric
        self.grid = grid

    def fit(self, X, y):
        KnnConfig(self.n_neighbors, self.metric)
        return super().fit(X, y)

    def predict_proba(self, X):
        p1 = _knn_eta_from_distances(self._distances(X), self.sample_.y, self.n_neighbors)
        return np.column_stack([1 - p1, p1])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] > 0.5).astype(int)


class MovingWindowClassifier(_DistanceClassifier):
    """Majority vote among the training curves within distance ``radius`` of the query.

    Parameters
    ----------
    radius : float, default=1.0
    metric : {'sup', 'l2'}, default='sup'
    grid : Grid or array-like, optional
    """

    def __init__(self, radius=1.0, metric="sup", grid=None):
        self.radius = radius
        self.metric = metric
        self.grid = grid

    def fit(self, X, y):
        MwrConfig(self.radius, self.metric)
        return super().fit(X, y)

    def predict(self, X):
        return _mwr_from_distances(self._distances(X), self.sample_.y, self.radius)
