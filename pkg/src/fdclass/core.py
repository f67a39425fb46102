"""Discretized curves: grids, norms, distance utilities and spline smoothing.

A curve is represented by its values at the nodes of a :class:`Grid`; a set of
curves is a 2-D array with one curve per row.  Every operation here is a pure
function of its arguments.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import BSpline
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import DimensionError, InsufficientDataError, ParameterError

__all__ = [
    "Grid",
    "LabeledSample",
    "MetricKind",
    "sup_distance",
    "l2_distance",
    "l2_inner",
    "pairwise_distances",
    "cross_distances",
    "nearest_rank",
    "pairwise_distance_percentile",
    "spline_basis",
    "smooth_spline",
    "SplineSmoother",
]

# Upper bound on the number of float64 cells materialized per distance chunk.
_CHUNK_CELLS = 2_000_000


class MetricKind(str, enum.Enum):
    """Distance used to compare two curves."""

    SUP = "sup"
    L2 = "l2"

    @classmethod
    def coerce(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParameterError(f"unknown metric {value!r}; expected 'sup' or 'l2'") from None


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing observation nodes ``t_1 < ... < t_N`` on ``[a, b]``.

    The interval endpoints are the first and last node.
    """

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float).ravel()
        if nodes.size < 2:
            raise DimensionError("a grid needs at least two nodes")
        if not np.all(np.isfinite(nodes)):
            raise DimensionError("grid nodes must be finite")
        if np.any(np.diff(nodes) <= 0):
            raise DimensionError("non-increasing grid")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def equispaced(cls, n_nodes, a=0.0, b=1.0):
        return cls(np.linspace(a, b, int(n_nodes)))

    @classmethod
    def coerce(cls, grid, n_nodes=None):
        """Return ``grid`` as a :class:`Grid`.

        ``None`` means ``n_nodes`` equispaced nodes on ``[0, 1]``.
        """
        if isinstance(grid, Grid):
            return grid
        if grid is None:
            if n_nodes is None:
                raise ParameterError("either a grid or a node count is required")
            return cls.equispaced(n_nodes)
        return cls(np.asarray(grid, dtype=float))

    @property
    def a(self):
        return float(self.nodes[0])

    @property
    def b(self):
        return float(self.nodes[-1])

    @property
    def n_nodes(self):
        return self.nodes.size

    def __len__(self):
        return self.nodes.size

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return np.array_equal(self.nodes, other.nodes)

    def __hash__(self):
        return hash(self.nodes.tobytes())

    @cached_property
    def weights(self):
        """Trapezoid quadrature weights, so that ``weights @ f`` approximates the integral."""
        dt = np.diff(self.nodes)
        w = np.zeros(self.nodes.size)
        w[:-1] += dt / 2
        w[1:] += dt / 2
        w.setflags(write=False)
        return w

    def require_same(self, other, what="grids"):
        if self != other:
            raise DimensionError(f"grid mismatch: {what} have different nodes")

    def check_curves(self, X, name="X"):
        """Validate a curve or a stack of curves against this grid and return it as floats."""
        X = np.asarray(X, dtype=float)
        if X.ndim not in (1, 2) or X.shape[-1] != self.nodes.size:
            raise DimensionError(
                f"{name} has shape {X.shape}; expected last dimension {self.nodes.size}"
            )
        if not np.all(np.isfinite(X)):
            raise DimensionError(f"{name} contains non-finite values")
        return X


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """Curves observed on a shared grid, with binary labels."""

    grid: Grid
    X: np.ndarray
    y: np.ndarray = field(default=None)

    def __post_init__(self):
        X = self.grid.check_curves(self.X)
        if X.ndim == 1:
            X = X[None, :]
        y = np.asarray(self.y)
        if y.ndim != 1 or y.size != X.shape[0]:
            raise DimensionError(f"{X.shape[0]} curves but {y.size} labels")
        if X.shape[0] < 1:
            raise InsufficientDataError("a labeled sample needs at least one curve")
        if not np.all(np.isin(y, (0, 1))):
            raise ParameterError("labels must be 0 or 1")
        X = X.copy()
        X.setflags(write=False)
        y = y.astype(int)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.y.size

    @property
    def class_counts(self):
        """``(n_0, n_1)``."""
        n1 = int(self.y.sum())
        return self.y.size - n1, n1

    def class_curves(self, label):
        return self.X[self.y == label]

    def __eq__(self, other):
        if not isinstance(other, LabeledSample):
            return NotImplemented
        return (
            self.grid == other.grid
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
        )


def _pair(x, y, g):
    g = Grid.coerce(g)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.shape[-1] != g.n_nodes:
        raise DimensionError(
            f"curve shapes {x.shape} and {y.shape} do not match a grid of {g.n_nodes} nodes"
        )
    return x, y, g


def sup_distance(x, y, g):
    """Maximum absolute difference of two curves over the grid nodes."""
    x, y, _ = _pair(x, y, g)
    return float(np.max(np.abs(x - y)))


def l2_distance(x, y, g):
    """L2 distance of two curves, integrated with the trapezoid rule on the grid."""
    x, y, g = _pair(x, y, g)
    d = x - y
    return math.sqrt(float(g.weights @ (d * d)))


def l2_inner(X, a, g):
    """Trapezoid L2 inner products of the rows of ``X`` with the curve(s) ``a``."""
    g = Grid.coerce(g)
    return np.asarray(X, dtype=float) @ (g.weights[:, None] * np.asarray(a, dtype=float).T)


def cross_distances(X, Y, g, metric="l2"):
    """Distance matrix between the rows of ``X`` (n x N) and ``Y`` (m x N).

    Differences are formed explicitly (no Gram-expansion), so equal curves are
    at distance exactly zero and ties are reproducible.
    """
    g = Grid.coerce(g)
    metric = MetricKind.coerce(metric)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[1] != g.n_nodes or Y.shape[1] != g.n_nodes:
        raise DimensionError(
            f"curves with {X.shape[1]} and {Y.shape[1]} values on a grid of {g.n_nodes} nodes"
        )
    out = np.empty((X.shape[0], Y.shape[0]))
    step = max(1, _CHUNK_CELLS // max(1, Y.shape[0] * g.n_nodes))
    w = g.weights
    for start in range(0, X.shape[0], step):
        diff = X[start : start + step, None, :] - Y[None, :, :]
        if metric is MetricKind.SUP:
            out[start : start + step] = np.max(np.abs(diff), axis=2)
        else:
            out[start : start + step] = np.sqrt(np.einsum("ijk,k->ij", diff * diff, w))
    return out


def pairwise_distances(X, g, metric="l2"):
    """Symmetric distance matrix of a stack of curves, with an exact zero diagonal."""
    D = cross_distances(X, X, g, metric)
    D = np.minimum(D, D.T)
    np.fill_diagonal(D, 0.0)
    return D


def nearest_rank(values, q):
    """Nearest-rank ``q``-quantile: the ``ceil(q * M)``-th smallest of ``M`` values."""
    if not 0.0 < q < 1.0:
        raise ParameterError(f"quantile level must lie in (0, 1), got {q}")
    values = np.sort(np.asarray(values, dtype=float).ravel())
    if values.size == 0:
        raise InsufficientDataError("no values to take a quantile of")
    rank = max(1, math.ceil(q * values.size - 1e-12))
    return float(values[rank - 1])


def _upper_pairs(D):
    return D[np.triu_indices(D.shape[0], k=1)]


def pairwise_distance_percentile(s, q, metric="l2"):
    """Nearest-rank ``q``-quantile of the ``n(n-1)/2`` pairwise distances of a sample.

    ``s`` is a :class:`LabeledSample` or a ``(grid, X)`` pair.
    """
    if not 0.0 < q < 1.0:
        raise ParameterError(f"quantile level must lie in (0, 1), got {q}")
    grid, X = (s.grid, s.X) if isinstance(s, LabeledSample) else s
    X = np.atleast_2d(X)
    if X.shape[0] < 2:
        raise InsufficientDataError("at least two curves are needed for pairwise distances")
    return nearest_rank(_upper_pairs(pairwise_distances(X, grid, metric)), q)


def spline_basis(g, basis_size):
    """Cubic B-spline design matrix (N x basis_size) with uniformly spaced interior knots."""
    g = Grid.coerce(g)
    basis_size = int(basis_size)
    if not 4 <= basis_size <= g.n_nodes:
        raise ParameterError(f"basis_size must lie in [4, {g.n_nodes}], got {basis_size}")
    k = 3
    interior = np.linspace(g.a, g.b, basis_size - k + 1)[1:-1]
    knots = np.concatenate([[g.a] * (k + 1), interior, [g.b] * (k + 1)])
    return BSpline.design_matrix(g.nodes, knots, k).toarray()


def smooth_spline(x, g, basis_size=None):
    """Least-squares projection of curve(s) onto a cubic B-spline basis.

    Parameters
    ----------
    x : array-like of shape (N,) or (n, N)
        Curve values at the grid nodes.
    g : Grid
    basis_size : int, optional
        Number of B-spline functions, between 4 and N.  Defaults to
        ``max(4, N // 4)``.

    Returns
    -------
    ndarray
        The fitted spline(s) evaluated back on the grid, same shape as ``x``.
    """
    g = Grid.coerce(g)
    x = g.check_curves(x, "x")
    if basis_size is None:
        basis_size = max(4, g.n_nodes // 4)
    B = spline_basis(g, basis_size)
    coef, *_ = np.linalg.lstsq(B, x.T, rcond=None)
    return (B @ coef).T


class SplineSmoother(TransformerMixin, BaseEstimator):
    """Pipeline step wrapping :func:`smooth_spline`.

    Parameters
    ----------
    basis_size : int, optional
        Number of cubic B-spline functions; ``max(4, N // 4)`` when omitted.
    grid : Grid or array-like, optional
        Observation nodes; equispaced on ``[0, 1]`` when omitted.
    """

    def __init__(self, basis_size=None, grid=None):
        self.basis_size = basis_size
        self.grid = grid

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        self.grid_ = Grid.coerce(self.grid, X.shape[1])
        if self.grid_.n_nodes != X.shape[1]:
            raise DimensionError(f"curves have {X.shape[1]} values, the grid has {self.grid_.n_nodes}")
        size = self.basis_size if self.basis_size is not None else max(4, X.shape[1] // 4)
        B = spline_basis(self.grid_, size)
        self.projection_ = B @ np.linalg.pinv(B)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self)
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise DimensionError(f"curves have {X.shape[1]} values, expected {self.n_features_in_}")
        return X @ self.projection_.T
