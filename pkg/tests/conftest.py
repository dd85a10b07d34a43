import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from blockkit import Graph


@pytest.fixture
def triangle():
    return Graph.from_edges(3, [(0, 1), (0, 2), (1, 2)])


@pytest.fixture
def path3():
    return Graph.from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def small6():
    # two triangles joined by one edge
    return Graph.from_edges(6, [(0, 1), (0, 2), (1, 2),
                                (3, 4), (3, 5), (4, 5), (2, 3)])


def random_multigraph(rng, n, max_edges=None):
    """A random multigraph with loops allowed, for property tests."""
    m = int(rng.integers(1, max_edges or (2 * n)))
    edges = [(int(rng.integers(n)), int(rng.integers(n))) for _ in range(m)]
    return Graph.from_edges(n, edges)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
