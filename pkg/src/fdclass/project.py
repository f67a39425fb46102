"""Projection-type classifiers: PLS discriminant analysis and RKHS regression.

Both act on the discretized curve ``(x(t_1), ..., x(t_N))``.  PLS reduces the
curves to a few scores with maximal covariance with the label and applies a
two-class linear discriminant on them.  The RKHS rule fits a Gaussian-kernel
regularized least-squares estimate of ``P(Y = 1 | x)`` and thresholds it at 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_curves, check_labels, require_both_classes, resolve_grid
from .core import Grid, LabeledSample, cross_distances, pairwise_distances
from .exceptions import DimensionError, FitError, InsufficientDataError, ParameterError

__all__ = [
    "PLSModel",
    "pls1",
    "pls_fit",
    "pls_classify",
    "PLSDAClassifier",
    "RKHSModel",
    "gaussian_gram",
    "rkhs_fit",
    "rkhs_classify",
    "RKHSClassifier",
]


def _xy(s, y=None):
    if isinstance(s, LabeledSample):
        return np.asarray(s.X, dtype=float), np.asarray(s.y, dtype=int)
    X = np.atleast_2d(np.asarray(s, dtype=float))
    return X, np.asarray(y, dtype=int)


def pls1(Xc, yc, n_components):
    """Single-response PLS by iterative deflation.

    Parameters
    ----------
    Xc : ndarray of shape (n, N)
        Column-centred predictors.
    yc : ndarray of shape (n,)
        Centred response.
    n_components : int

    Returns
    -------
    W, P, T : ndarrays
        Weights (N, c), loadings (N, c) and scores (n, c).  Fewer than
        ``n_components`` columns are returned if the residual covariance with
        the response vanishes first.
    """
    X = Xc.copy()
    n, N = X.shape
    W, P, T = [], [], []
    scale = np.linalg.norm(Xc.T @ yc)
    for _ in range(n_components):
        w = X.T @ yc
        norm = np.linalg.norm(w)
        if norm <= 1e-12 * max(scale, 1e-300):
            break
        w /= norm
        t = X @ w
        tt = t @ t
        p = X.T @ t / tt
        X -= np.outer(t, p)
        W.append(w)
        P.append(p)
        T.append(t)
    if not W:
        raise FitError("the predictors carry no covariance with the labels")
    return np.column_stack(W), np.column_stack(P), np.column_stack(T)


def _lda(T, y, priors=None):
    """Pooled-covariance two-class discriminant on scores: returns (coef, intercept)."""
    T0, T1 = T[y == 0], T[y == 1]
    n0, n1 = len(T0), len(T1)
    if n0 == 0 or n1 == 0:
        raise InsufficientDataError("both classes are needed for a discriminant")
    mu0, mu1 = T0.mean(axis=0), T1.mean(axis=0)
    dof = n0 + n1 - 2
    if dof < 1:
        raise FitError("not enough curves to estimate a pooled covariance")
    S = ((T0 - mu0).T @ (T0 - mu0) + (T1 - mu1).T @ (T1 - mu1)) / dof
    try:
        coef = linalg.solve(S, mu1 - mu0, assume_a="pos")
    except (linalg.LinAlgError, ValueError) as exc:
        raise FitError(f"pooled score covariance is singular: {exc}") from exc
    if not np.all(np.isfinite(coef)):
        raise FitError("pooled score covariance is singular")
    if priors is None:
        priors = (n0 / (n0 + n1), n1 / (n0 + n1))
    intercept = -coef @ (mu0 + mu1) / 2 + np.log(priors[1] / priors[0])
    return coef, intercept


@dataclass(frozen=True)
class PLSModel:
    """Fitted PLS discriminant: ``label = 1`` iff ``(x - center) @ rotations @ coef + intercept > 0``."""

    center: np.ndarray
    weights: np.ndarray
    loadings: np.ndarray
    rotations: np.ndarray
    scores: np.ndarray
    coef: np.ndarray
    intercept: float

    @property
    def n_components(self):
        return self.weights.shape[1]

    def transform(self, X):
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.center.size:
            raise DimensionError(f"curve has {X.shape[-1]} values, model expects {self.center.size}")
        return (X - self.center) @ self.rotations

    def decision_function(self, X):
        return self.transform(X) @ self.coef + self.intercept


def _pls_model(X, y, n_components, priors=None):
    n, N = X.shape
    if not 1 <= n_components <= min(N, n - 1):
        raise ParameterError(f"n_components must lie in [1, {min(N, n - 1)}], got {n_components}")
    center = X.mean(axis=0)
    Xc = X - center
    W, P, T = pls1(Xc, y - y.mean(), n_components)
    R = W @ linalg.inv(P.T @ W)
    coef, intercept = _lda(T, y, priors)
    return PLSModel(center, W, P, R, T, coef, float(intercept))


def pls_fit(s, n_components, y=None):
    """Fit PLS scores plus a pooled-covariance linear discriminant.

    ``s`` is a :class:`LabeledSample`, or a curve matrix with labels in ``y``.
    """
    X, y = _xy(s, y)
    if X.shape[0] < 4:
        raise InsufficientDataError("PLS discrimination needs at least four curves")
    require_both_classes(y)
    return _pls_model(X, y, int(n_components))


def pls_classify(m, x):
    out = (np.asarray(m.decision_function(x)) > 0).astype(int)
    return int(out) if out.ndim == 0 else out


class PLSDAClassifier(ClassifierMixin, BaseEstimator):
    """PLS discriminant analysis on discretized curves.

    Parameters
    ----------
    n_components : int, default=2
        Number of PLS directions.
    """

    def __init__(self, n_components=2):
        self.n_components = n_components

    def fit(self, X, y):
        X, y = check_labels(X, y)
        self.model_ = pls_fit(X, self.n_components, y)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self)
        return self.model_.transform(check_array(X, dtype=float))

    def decision_function(self, X):
        check_is_fitted(self)
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise DimensionError(f"curves have {X.shape[1]} values, expected {self.n_features_in_}")
        return self.model_.decision_function(X)

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(int)


def gaussian_gram(X, Y, sigma, g):
    """``exp(-||X_i - Y_j||_2^2 / sigma^2)`` with the trapezoid L2 norm."""
    D = cross_distances(X, Y, g, "l2")
    return np.exp(-(D**2) / sigma**2)


@dataclass(frozen=True)
class RKHSModel:
    grid: Grid
    centers: np.ndarray
    coef: np.ndarray
    sigma: float
    lam: float

    def eta(self, X):
        X = self.grid.check_curves(X, "x")
        return gaussian_gram(np.atleast_2d(X), self.centers, self.sigma, self.grid) @ self.coef


def rkhs_fit(s, sigma, lam):
    """Solve ``(K + n lam I) c = Y`` for the Gaussian-kernel regression coefficients."""
    if not (sigma > 0 and lam > 0):
        raise ParameterError("sigma and lambda must be positive")
    X, y = s.X, s.y.astype(float)
    n = y.size
    K = gaussian_gram(X, X, sigma, s.grid)
    if not np.all(np.isfinite(K)):
        raise FitError("kernel matrix has non-finite entries")
    try:
        coef = linalg.cho_solve(linalg.cho_factor(K + n * lam * np.eye(n)), y)
    except linalg.LinAlgError as exc:
        raise FitError(f"regularized kernel system is not positive definite: {exc}") from exc
    return RKHSModel(s.grid, X.copy(), coef, float(sigma), float(lam))


def rkhs_classify(m, x):
    out = (np.asarray(m.eta(x)) > 0.5).astype(int)
    return int(out[0]) if np.ndim(x) == 1 else out


class RKHSClassifier(ClassifierMixin, BaseEstimator):
    """Gaussian-kernel regularized least squares on the labels, thresholded at 1/2.

    Parameters
    ----------
    sigma : float, default=1.0
        Kernel width, in units of the L2 distance between curves.
    lam : float, default=1e-3
        Penalty on the RKHS norm.
    grid : Grid or array-like, optional
    """

    def __init__(self, sigma=1.0, lam=1e-3, grid=None):
        self.sigma = sigma
        self.lam = lam
        self.grid = grid

    def fit(self, X, y):
        X, y = check_labels(X, y)
        self.grid_ = resolve_grid(self.grid, X.shape[1])
        self.model_ = rkhs_fit(LabeledSample(self.grid_, X, y), self.sigma, self.lam)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        """Estimated ``P(Y = 1 | x)`` (not clipped to [0, 1])."""
        check_is_fitted(self)
        return self.model_.eta(check_curves(X, self.grid_))

    def predict(self, X):
        return (self.decision_function(X) > 0.5).astype(int)


def median_distance(X, g):
    """Median pairwise L2 distance of a curve sample (scale for the kernel width grid)."""
    D = pairwise_distances(X, g, "l2")
    iu = np.triu_indices(D.shape[0], k=1)
    return float(np.median(D[iu])) if iu[0].size else 1.0
