"""Synthetic test networks with known structure.

Two families: a ring of cliques, the standard stress test for division
sampling (every clique is unambiguous local structure, but cliques can
be grouped into communities many ways), and the degree-corrected block
model, for planted-partition recovery experiments.
"""

from __future__ import annotations

import numpy as np

from .graph import Graph
from .partition import Partition


def ring_of_cliques(cliques, size, ports="fixed", seed=0):
    """A ring of `cliques` cliques of `size` nodes; returns (Graph, truth).

    Clique i occupies nodes i*size .. (i+1)*size - 1 with all internal
    pairs present, and one edge joins it to clique (i+1) mod cliques.
    With ports="fixed" that edge runs from node 0 of clique i to node 1
    of clique i+1 (so every degree is size-1 or size); ports="random"
    draws both endpoints per link from the given seed, which recovery
    results should be insensitive to.
    """
    c, s = int(cliques), int(size)
    if c < 3:
        raise ValueError("need at least 3 cliques to form a ring")
    if s < 2:
        raise ValueError("cliques need at least 2 nodes")
    if ports not in ("fixed", "random"):
        raise ValueError("ports must be 'fixed' or 'random'")
    rng = np.random.default_rng(seed) if ports == "random" else None
    edges = []
    for ci in range(c):
        base = ci * s
        for i in range(s):
            for j in range(i + 1, s):
                edges.append((base + i, base + j))
    for ci in range(c):
        nxt = (ci + 1) % c
        if ports == "fixed":
            edges.append((ci * s + 0, nxt * s + 1))
        else:
            edges.append((ci * s + int(rng.integers(s)), nxt * s + int(rng.integers(s))))
    graph = Graph.from_edges(c * s, edges)
    truth = Partition(np.repeat(np.arange(c), s))
    return graph, truth


class DcsbmParams:
    """Degree-corrected block model parameters.

    ``g`` assigns each node a group, ``omega`` is the symmetric matrix
    of group-pair edge rates, and ``theta`` the node propensities,
    which must average one within each group (tolerance 1e-9) so the
    rates are identifiable.  theta defaults to all ones.
    """

    def __init__(self, g, omega, theta=None, seed=0):
        part = Partition(np.asarray(g, dtype=np.int64))
        self.g = part.g
        self.k = part.k
        self.n = part.n
        self.omega = np.asarray(omega, dtype=np.float64)
        if self.omega.shape != (self.k, self.k):
            raise ValueError(f"omega must be {self.k}x{self.k} for {self.k} groups")
        if not np.allclose(self.omega, self.omega.T):
            raise ValueError("omega must be symmetric")
        if (self.omega < 0).any():
            raise ValueError("omega entries must be nonnegative")
        if theta is None:
            theta = np.ones(self.n)
        self.theta = np.asarray(theta, dtype=np.float64)
        if self.theta.shape != (self.n,):
            raise ValueError("theta must give one propensity per node")
        if (self.theta < 0).any():
            raise ValueError("theta must be nonnegative")
        for r in range(self.k):
            mean = self.theta[self.g == r].mean()
            if abs(mean - 1.0) > 1e-9:
                raise ValueError(
                    f"theta must average 1 within each group; group {r} has {mean!r}"
                )
        self.seed = int(seed)


def dcsbm_generate(params):
    """Draw one multigraph from the block model, deterministic by seed.

    Pair (i, j) gets a Poisson count with mean theta_i theta_j
    omega_{g_i g_j}; node i gets half that rate in self-loops.
    """
    n = params.n
    g = params.g
    theta = params.theta
    rng = np.random.default_rng(params.seed)
    rates = np.outer(theta, theta) * params.omega[np.ix_(g, g)]
    iu, ju = np.triu_indices(n, 1)
    pair_counts = rng.poisson(rates[iu, ju])
    loop_counts = rng.poisson(0.5 * np.diagonal(rates))
    adj = {}
    nz = pair_counts > 0
    for u, v, w in zip(iu[nz], ju[nz], pair_counts[nz]):
        adj[(int(u), int(v))] = int(w)
    for i in np.nonzero(loop_counts)[0]:
        adj[(int(i), int(i))] = 2 * int(loop_counts[i])
    return Graph(n, adj)
