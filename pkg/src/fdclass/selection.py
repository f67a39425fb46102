"""Method registry and leave-one-out parameter selection.

Each method id maps to an estimator factory and a default candidate grid.
Candidate grids are ordered simplest-first, so ties in leave-one-out accuracy
go to the simplest candidate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .bayes import PluginBayesClassifier
from .core import LabeledSample, MetricKind, nearest_rank, pairwise_distances
from .depth import HModeDepthClassifier, RPDepthClassifier
from .exceptions import InsufficientDataError, ParameterError
from .gp import model1_population
from .neighbors import KNeighborsCurveClassifier, MovingWindowClassifier, neighbor_order
from .project import (
    PLSDAClassifier,
    RKHSClassifier,
    _lda,
    _pls_model,
    gaussian_gram,
    median_distance,
)

__all__ = [
    "METHODS",
    "CVResult",
    "make_estimator",
    "default_grid",
    "loo_cv_select",
    "loo_accuracy",
]

METHODS = ("knn-sup", "knn-l2", "pls", "rkhs", "hmode", "rp", "mwr", "bayes")
ALIASES = {"mwr-sup": ("mwr", "sup"), "mwr-l2": ("mwr", "l2")}

K_GRID = tuple(range(1, 22, 2))
MWR_PERCENTILES = (0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1)
PLS_MAX_COMPONENTS = 10
RKHS_LAMBDAS = tuple(10.0**e for e in range(0, -7, -1))
RKHS_SIGMA_MULTIPLES = (2.0, 1.0, 0.5, 0.25, 0.1)
MWR_DEFAULT_METRIC = "sup"


@dataclass
class CVResult:
    """Outcome of a leave-one-out search."""

    params: dict
    accuracy: float
    candidates: list = field(default_factory=list)
    accuracies: np.ndarray = None


def _split(method):
    method = str(method).lower()
    if method in ALIASES:
        return ALIASES[method]
    if method.startswith("knn-"):
        return "knn", MetricKind.coerce(method[4:]).value
    if method == "mwr":
        return "mwr", MWR_DEFAULT_METRIC
    if method in METHODS:
        return method, None
    raise ParameterError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


def make_estimator(method, params=None, grid=None, random_state=None, models=None):
    """Instantiate the estimator behind a method id with the given parameters."""
    base, metric = _split(method)
    params = dict(params or {})
    if base == "knn":
        return KNeighborsCurveClassifier(metric=metric, grid=grid, **params)
    if base == "mwr":
        return MovingWindowClassifier(metric=metric, grid=grid, **params)
    if base == "pls":
        return PLSDAClassifier(**params)
    if base == "rkhs":
        return RKHSClassifier(grid=grid, **params)
    if base == "hmode":
        return HModeDepthClassifier(grid=grid, **params)
    if base == "rp":
        return RPDepthClassifier(grid=grid, random_state=random_state, **params)
    if base == "bayes":
        m0, m1 = models if models is not None else (model1_population(0), model1_population(1))
        return PluginBayesClassifier(m0, m1, grid=grid, **params)
    raise ParameterError(f"unknown method {method!r}")


def default_grid(method, s):
    """Ordered candidate parameter sets for ``method`` on the training sample ``s``."""
    base, metric = _split(method)
    n, N = s.X.shape
    if base == "knn":
        ks = [k for k in K_GRID if k <= n - 1] or [1]
        return [{"n_neighbors": k} for k in ks]
    if base == "mwr":
        D = pairwise_distances(s.X, s.grid, metric)
        d = D[np.triu_indices(n, k=1)]
        return [{"radius": nearest_rank(d, q)} for q in MWR_PERCENTILES]
    if base == "pls":
        top = min(PLS_MAX_COMPONENTS, N, n - 2)
        return [{"n_components": c} for c in range(1, max(top, 1) + 1)]
    if base == "rkhs":
        scale = median_distance(s.X, s.grid)
        return [
            {"sigma": mult * scale, "lam": lam}
            for lam in RKHS_LAMBDAS
            for mult in RKHS_SIGMA_MULTIPLES
        ]
    return [{}]


def _loo_knn(s, metric, candidates):
    D = pairwise_distances(s.X, s.grid, metric)
    np.fill_diagonal(D, np.inf)
    labels = s.y[neighbor_order(D)]
    csum = np.cumsum(labels, axis=1)
    out = []
    for params in candidates:
        k = params["n_neighbors"]
        if k > s.y.size - 1:
            raise ParameterError(f"k={k} too large for leave-one-out on {s.y.size} curves")
        pred = (csum[:, k - 1] / k > 0.5).astype(int)
        out.append(np.mean(pred == s.y))
    return np.array(out)


def _loo_mwr(s, metric, candidates):
    D = pairwise_distances(s.X, s.grid, metric)
    np.fill_diagonal(D, np.inf)
    out = []
    for params in candidates:
        inside = D <= params["radius"]
        n1 = inside[:, s.y == 1].sum(axis=1)
        n0 = inside[:, s.y == 0].sum(axis=1)
        out.append(np.mean((n1 > n0).astype(int) == s.y))
    return np.array(out)


def _loo_pls(s, candidates):
    X, y = s.X, s.y
    n = y.size
    comps = [p["n_components"] for p in candidates]
    correct = np.zeros(len(comps))
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        keep[i] = False
        Xi, yi = X[keep], y[keep]
        keep[i] = True
        full = _pls_model(Xi, yi, max(comps))
        for j, c in enumerate(comps):
            c = min(c, full.n_components)
            R = full.weights[:, :c] @ linalg.inv(full.loadings[:, :c].T @ full.weights[:, :c])
            coef, icpt = _lda(full.scores[:, :c], yi)
            score = (X[i] - full.center) @ R @ coef + icpt
            correct[j] += int(score > 0) == y[i]
    return correct / n


def _loo_rkhs(s, candidates):
    """Leave-one-out via the hat-matrix identity for kernel ridge regression.

    The penalty is held at ``n * lam`` for every fold.
    """
    y = s.y.astype(float)
    n = y.size
    out = np.empty(len(candidates))
    eig = {}
    for j, params in enumerate(candidates):
        sigma, lam = params["sigma"], params["lam"]
        if sigma not in eig:
            eig[sigma] = linalg.eigh(gaussian_gram(s.X, s.X, sigma, s.grid))
        evals, Q = eig[sigma]
        shrink = np.clip(evals, 0, None) / (np.clip(evals, 0, None) + n * lam)
        H_diag = np.einsum("ij,j,ij->i", Q, shrink, Q)
        fitted = Q @ (shrink * (Q.T @ y))
        loo = (fitted - H_diag * y) / (1 - H_diag)
        out[j] = np.mean((loo > 0.5).astype(int) == s.y)
    return out


def _loo_generic(s, method, candidates, random_state=None):
    n = s.y.size
    out = np.zeros(len(candidates))
    keep = np.ones(n, dtype=bool)
    for j, params in enumerate(candidates):
        hits = 0
        for i in range(n):
            keep[i] = False
            est = make_estimator(method, params, s.grid, random_state)
            est.fit(s.X[keep], s.y[keep])
            keep[i] = True
            hits += int(est.predict(s.X[i : i + 1])[0] == s.y[i])
        out[j] = hits / n
    return out


def loo_accuracy(s, method, candidates, random_state=None):
    """Leave-one-out accuracy of every candidate parameter set, in order."""
    base, metric = _split(method)
    if base == "knn":
        return _loo_knn(s, metric, candidates)
    if base == "mwr":
        return _loo_mwr(s, metric, candidates)
    if base == "pls":
        return _loo_pls(s, candidates)
    if base == "rkhs":
        return _loo_rkhs(s, candidates)
    return _loo_generic(s, method, candidates, random_state)


_PARAM_KEYS = {
    "knn": {"n_neighbors"},
    "mwr": {"radius"},
    "pls": {"n_components"},
    "rkhs": {"sigma", "lam"},
    "hmode": {"quantile"},
    "rp": {"n_directions", "quantile"},
    "bayes": {"prior"},
}


def loo_cv_select(s, method, grid=None, random_state=None):
    """Pick the candidate with the highest leave-one-out accuracy.

    Parameters
    ----------
    s : LabeledSample
    method : str
        One of :data:`METHODS` (``'mwr-sup'`` and ``'mwr-l2'`` are also accepted).
    grid : list of dict, optional
        Ordered candidates; defaults to :func:`default_grid`.  Ties go to the
        earliest candidate.

    Returns
    -------
    CVResult
    """
    if not isinstance(s, LabeledSample):
        raise ParameterError("loo_cv_select expects a LabeledSample")
    if len(s) < 3:
        raise InsufficientDataError("leave-one-out selection needs at least three curves")
    base, _ = _split(method)
    candidates = list(default_grid(method, s) if grid is None else grid)
    if not candidates:
        raise ParameterError("empty parameter grid")
    for params in candidates:
        unknown = set(params) - _PARAM_KEYS[base]
        if unknown:
            raise ParameterError(f"parameters {sorted(unknown)} do not apply to {method!r}")
    if len(candidates) == 1 and base in ("hmode", "rp", "bayes") and grid is None:
        # untuned methods: report the selected (only) candidate without the O(n^2) refits
        return CVResult(candidates[0], float("nan"), candidates, np.array([np.nan]))
    acc = loo_accuracy(s, method, candidates, random_state)
    best = int(np.argmax(acc))
    return CVResult(candidates[best], float(acc[best]), candidates, acc)
