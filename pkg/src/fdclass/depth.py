"""Kernel-based functional depths and the 'deeper population' classifier.

Two depths are provided.  The h-mode depth is a kernel density value in L2.
The random-projection depth averages the univariate h-mode depth of the
curve's projections over random directions.  A curve is assigned to the class
in which it is deeper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_is_fitted

from ._validation import check_curves, check_labels, require_both_classes, resolve_grid
from .core import Grid, cross_distances, l2_inner, nearest_rank, pairwise_distance_percentile
from .exceptions import InsufficientDataError, ParameterError

__all__ = [
    "HModeConfig",
    "RPConfig",
    "gaussian_kernel",
    "hmode_depth",
    "hmode_depth_1d",
    "random_directions",
    "rp_depth",
    "depth_classify",
    "HModeDepthClassifier",
    "RPDepthClassifier",
]

KERNEL_PEAK = math.sqrt(2 / math.pi)
BANDWIDTH_FLOOR = 1e-8
_CHUNK_CELLS = 4_000_000


@dataclass(frozen=True)
class HModeConfig:
    h: float = None
    quantile: float = 0.2

    def __post_init__(self):
        if self.h is not None and not self.h > 0:
            raise ParameterError("bandwidth must be positive")


@dataclass(frozen=True)
class RPConfig:
    n_directions: int = 50
    seed: int = 0
    quantile: float = 0.2

    def __post_init__(self):
        if self.n_directions < 1:
            raise ParameterError("at least one random direction is required")


def gaussian_kernel(t):
    """``sqrt(2/pi) exp(-t^2 / 2)``."""
    t = np.asarray(t, dtype=float)
    return KERNEL_PEAK * np.exp(-0.5 * t * t)


def _nonempty(X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] == 0:
        raise InsufficientDataError("depth with respect to an empty class")
    return X


def hmode_depth(x, class_curves, h, g):
    """Average of ``K_h(||x - X_i||_2)`` over a class sample, ``K_h(t) = K(t/h)/h``."""
    if not h > 0:
        raise ParameterError("bandwidth must be positive")
    Xc = _nonempty(class_curves)
    g = Grid.coerce(g)
    x = g.check_curves(x, "x")
    D = cross_distances(np.atleast_2d(x), Xc, g, "l2")
    out = gaussian_kernel(D / h).mean(axis=1) / h
    return float(out[0]) if x.ndim == 1 else out


def hmode_bandwidth(class_curves, g, quantile=0.2):
    """Nearest-rank percentile of within-class pairwise L2 distances.

    Floored at ``BANDWIDTH_FLOOR``, which is also the value for a single curve.
    """
    Xc = _nonempty(class_curves)
    if Xc.shape[0] < 2:
        return BANDWIDTH_FLOOR
    return max(pairwise_distance_percentile((g, Xc), quantile, "l2"), BANDWIDTH_FLOOR)


def hmode_depth_1d(values, sample, h):
    """Univariate h-mode depth of ``values`` within the scalar ``sample``."""
    values = np.atleast_1d(np.asarray(values, dtype=float))
    sample = np.asarray(sample, dtype=float).ravel()
    return gaussian_kernel((values[:, None] - sample[None, :]) / h).mean(axis=1) / h


def _projected_bandwidths(P, quantile):
    """Per-column nearest-rank percentile of pairwise absolute differences, floored."""
    n = P.shape[0]
    if n < 2:
        return np.full(P.shape[1], BANDWIDTH_FLOOR)
    iu = np.triu_indices(n, k=1)
    diffs = np.abs(P[iu[0]] - P[iu[1]])
    h = np.array([nearest_rank(diffs[:, j], quantile) for j in range(P.shape[1])])
    return np.maximum(h, BANDWIDTH_FLOOR)


def random_directions(n_directions, n_nodes, random_state=None):
    """Directions uniform on the unit sphere of R^N: ``Z / ||Z||`` with ``Z`` standard normal."""
    if isinstance(random_state, np.random.Generator):
        rng = random_state
    else:
        rng = check_random_state(random_state)
    Z = rng.standard_normal((n_directions, n_nodes))
    return Z / np.linalg.norm(Z, axis=1, keepdims=True)


def _rp_depth_projected(Px, PX, h):
    # Px (m, d), PX (n, d), h (d,) -> mean over directions of the 1-d depth
    m, d = Px.shape
    out = np.empty(m)
    step = max(1, _CHUNK_CELLS // max(1, PX.shape[0] * d))
    for start in range(0, m, step):
        u = (Px[start : start + step, None, :] - PX[None, :, :]) / h
        out[start : start + step] = (gaussian_kernel(u).mean(axis=1) / h).mean(axis=1)
    return out


def rp_depth(x, class_curves, cfg, g, directions=None):
    """Random-projection depth of curve(s) ``x`` with respect to a class sample.

    Projections use the trapezoid L2 inner product.  The univariate depth is
    the one-dimensional h-mode depth with bandwidth equal to the
    ``cfg.quantile`` percentile of pairwise projected differences.
    ``directions`` overrides the random draw (one direction per row).
    """
    Xc = _nonempty(class_curves)
    g = Grid.coerce(g)
    x = g.check_curves(x, "x")
    if directions is None:
        directions = random_directions(cfg.n_directions, g.n_nodes, cfg.seed)
    directions = np.atleast_2d(directions)
    PX = l2_inner(Xc, directions, g)
    h = _projected_bandwidths(PX, cfg.quantile)
    out = _rp_depth_projected(l2_inner(np.atleast_2d(x), directions, g), PX, h)
    return float(out[0]) if x.ndim == 1 else out


def _deeper(d0, d1):
    return (np.asarray(d1) > np.asarray(d0)).astype(int)


def depth_classify(x, s, method="hmode", cfg=None):
    """Assign ``x`` to the class in which it is strictly deeper; ties go to class 0.

    ``method`` is ``'hmode'`` (per-class percentile bandwidth) or ``'rp'``
    (directions shared by both classes).
    """
    X0, X1 = s.class_curves(0), s.class_curves(1)
    if X0.shape[0] == 0 or X1.shape[0] == 0:
        raise InsufficientDataError("both classes must be present")
    method = str(method).lower()
    if method == "hmode":
        q = cfg.quantile if cfg is not None else 0.2
        d0 = hmode_depth(x, X0, hmode_bandwidth(X0, s.grid, q), s.grid)
        d1 = hmode_depth(x, X1, hmode_bandwidth(X1, s.grid, q), s.grid)
    elif method == "rp":
        cfg = cfg if cfg is not None else RPConfig()
        dirs = random_directions(cfg.n_directions, s.grid.n_nodes, cfg.seed)
        d0 = rp_depth(x, X0, cfg, s.grid, dirs)
        d1 = rp_depth(x, X1, cfg, s.grid, dirs)
    else:
        raise ParameterError(f"unknown depth method {method!r}")
    out = _deeper(d0, d1)
    return int(out) if out.ndim == 0 else out


class _DepthClassifier(ClassifierMixin, BaseEstimator):
    def fit(self, X, y):
        X, y = check_labels(X, y)
        require_both_classes(y)
        self.grid_ = resolve_grid(self.grid, X.shape[1])
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        self.class_curves_ = (X[y == 0], X[y == 1])
        self._fit_class_params()
        return self

    def predict(self, X):
        d = self.depths(X)
        return _deeper(d[:, 0], d[:, 1])


class HModeDepthClassifier(_DepthClassifier):
    """Classify to the class of larger h-mode depth.

    Parameters
    ----------
    quantile : float, default=0.2
        Each class bandwidth is this nearest-rank percentile of the
        within-class pairwise L2 distances.
    grid : Grid or array-like, optional
    """

    def __init__(self, quantile=0.2, grid=None):
        self.quantile = quantile
        self.grid = grid

    def _fit_class_params(self):
        self.bandwidths_ = tuple(
            hmode_bandwidth(Xc, self.grid_, self.quantile) for Xc in self.class_curves_
        )

    def depths(self, X):
        """``(n, 2)`` array of depths with respect to class 0 and class 1."""
        check_is_fitted(self)
        X = check_curves(X, self.grid_)
        return np.column_stack(
            [
                np.atleast_1d(hmode_depth(X, Xc, h, self.grid_))
                for Xc, h in zip(self.class_curves_, self.bandwidths_)
            ]
        )


class RPDepthClassifier(_DepthClassifier):
    """Classify to the class of larger random-projection depth.

    Parameters
    ----------
    n_directions : int, default=50
    quantile : float, default=0.2
        Percentile of pairwise projected differences used as the 1-d bandwidth.
    random_state : int, RandomState or Generator, optional
        Seed of the directions, drawn once per ``predict`` call and shared by
        both classes.
    grid : Grid or array-like, optional
    """

    def __init__(self, n_directions=50, quantile=0.2, random_state=None, grid=None):
        self.n_directions = n_directions
        self.quantile = quantile
        self.random_state = random_state
        self.grid = grid

    def _fit_class_params(self):
        RPConfig(self.n_directions)

    def depths(self, X):
        check_is_fitted(self)
        X = check_curves(X, self.grid_)
        dirs = random_directions(self.n_directions, self.grid_.n_nodes, self.random_state)
        cfg = RPConfig(self.n_directions, quantile=self.quantile)
        return np.column_stack(
            [np.atleast_1d(rp_depth(X, Xc, cfg, self.grid_, dirs)) for Xc in self.class_curves_]
        )
