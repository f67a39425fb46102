"""Input checks shared by the estimators."""

import numpy as np
from sklearn.utils.validation import check_array, check_X_y

from .core import Grid
from .exceptions import DimensionError, InsufficientDataError, ParameterError


def check_labels(X, y):
    """Validate a curve matrix with binary labels; returns float ``X`` and int ``y``."""
    X, y = check_X_y(X, y, dtype=float, ensure_min_samples=1)
    if not np.all(np.isin(y, (0, 1))):
        raise ParameterError("labels must be 0 or 1")
    return X, y.astype(int)


def check_curves(X, grid):
    X = check_array(X, dtype=float)
    if X.shape[1] != grid.n_nodes:
        raise DimensionError(f"curves have {X.shape[1]} values, the fitted grid has {grid.n_nodes}")
    return X


def resolve_grid(grid, n_nodes, a=0.0, b=1.0):
    """Grid supplied to an estimator, or ``n_nodes`` equispaced nodes on ``[a, b]``."""
    if grid is None:
        return Grid.equispaced(n_nodes, a, b)
    grid = Grid.coerce(grid)
    if grid.n_nodes != n_nodes:
        raise DimensionError(f"curves have {n_nodes} values, the grid has {grid.n_nodes} nodes")
    return grid


def require_both_classes(y):
    if not (np.any(y == 0) and np.any(y == 1)):
        raise InsufficientDataError("both classes must be present in the training sample")
