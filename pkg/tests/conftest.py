import numpy as np
import pytest

from fdclass import Grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def grid51():
    return Grid.equispaced(51)


def constant_curves(values, grid):
    """Curves equal to the given constants at every node."""
    return np.outer(np.asarray(values, dtype=float), np.ones(grid.n_nodes))
