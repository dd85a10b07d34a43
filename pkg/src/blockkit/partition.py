"""Community assignments and the collapsed posterior over them.

A division of an n-node graph is a surjective label vector g onto
0..k-1.  With the propensity and rate parameters of the degree-corrected
block model integrated out against maximum-entropy priors, the posterior
weight of a division depends only on the group sizes n_r, the summed
degrees kappa_r, and the inter/intra-group edge counts m_rs:

    log P(g,k | A) = -k log n + sum_r [ log n_r! + kappa_r log n_r
                       + log (n_r - 1)! - log (n_r + kappa_r - 1)! ]
                   + sum_{r<s} [ log m_rs! - (m_rs + 1) log(p n_r n_s + 1) ]
                   + sum_r [ log m_rr! - (m_rr + 1) log(p n_r^2 / 2 + 1) ]

up to additive constants shared by every division of the same graph.  The
hyperparameter p is the prior mean of the edge rates; its default here is
the observed density 2m/n^2 and it can be overridden.

All factorials go through log-gamma; everything is kept in log space.
Moves of a single node are evaluated incrementally by PartitionState,
touching only the two affected groups and their pair terms.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

#: Sentinel accepted by move operations to mean "open a fresh community".
NEW_COMMUNITY = -1

_LN = math.log
_LG = math.lgamma


class Partition:
    """Surjective node-to-community labels g with community count k."""

    def __init__(self, g, k=None):
        self.g = np.asarray(g, dtype=np.int64).copy()
        if self.g.ndim != 1 or self.g.size == 0:
            raise ValueError("assignment must be a nonempty 1-d sequence")
        kk = int(self.g.max()) + 1 if k is None else int(k)
        counts = np.bincount(self.g, minlength=kk)
        if self.g.min() < 0 or len(counts) != kk or (counts == 0).any():
            raise ValueError("labels must cover 0..k-1 with no empty community")
        self.k = kk

    @property
    def n(self):
        return self.g.size

    def sizes(self):
        return np.bincount(self.g, minlength=self.k)

    def canonical(self):
        """Relabel communities in first-appearance order."""
        mapping = {}
        out = np.empty_like(self.g)
        for idx, lab in enumerate(self.g):
            lab = int(lab)
            if lab not in mapping:
                mapping[lab] = len(mapping)
            out[idx] = mapping[lab]
        return Partition(out, self.k)

    def __eq__(self, other):
        return isinstance(other, Partition) and self.k == other.k and np.array_equal(self.g, other.g)

    def __repr__(self):
        return f"Partition(k={self.k}, g={self.g.tolist()})"


class GroupStats:
    """Sufficient statistics of a division: sizes, degree sums, edge counts.

    ``edge_counts`` maps ordered pairs (r, s) with r <= s to the number of
    edges between groups r and s; the diagonal entry counts each internal
    edge once.  Pairs with zero edges are absent.
    """

    def __init__(self, sizes, degree_sums, edge_counts):
        self.sizes = np.asarray(sizes, dtype=np.int64)
        self.degree_sums = np.asarray(degree_sums, dtype=np.int64)
        self.edge_counts = dict(edge_counts)

    def copy(self):
        return GroupStats(self.sizes.copy(), self.degree_sums.copy(), dict(self.edge_counts))

    def __eq__(self, other):
        return (
            isinstance(other, GroupStats)
            and np.array_equal(self.sizes, other.sizes)
            and np.array_equal(self.degree_sums, other.degree_sums)
            and self.edge_counts == other.edge_counts
        )


def compute_stats(graph, partition):
    """Exact group statistics from a single pass over the edges."""
    g = partition.g
    if g.size != graph.n:
        raise ValueError("partition does not match graph size")
    if g.max() >= partition.k:
        raise ValueError("assignment index out of range")
    k = partition.k
    sizes = np.bincount(g, minlength=k)
    degree_sums = np.bincount(g, weights=graph.degrees, minlength=k).astype(np.int64)
    u, v, w = graph.edge_arrays()
    edge_counts = {}
    if u.size:
        ru = g[u]
        rv = g[v]
        lo = np.minimum(ru, rv)
        hi = np.maximum(ru, rv)
        # diagonal input entries carry A_ii = 2 * loops; one loop = one edge
        is_diag = u == v
        cnt = np.where(is_diag, w // 2, w)
        same = lo == hi
        flat = lo * k + hi
        sums = np.bincount(flat, weights=cnt, minlength=k * k).astype(np.int64)
        del same
        for f in np.nonzero(sums)[0]:
            edge_counts[(int(f) // k, int(f) % k)] = int(sums[f])
    return GroupStats(sizes, degree_sums, edge_counts)


def log_prior(partition):
    """Sequential-assignment prior: -k log n + sum_r log n_r!"""
    n = partition.n
    sizes = partition.sizes()
    return float(-partition.k * _LN(n) + gammaln(sizes + 1.0).sum())


def log_likelihood_marginal(graph, stats, p):
    """Collapsed likelihood of the graph given group statistics.

    ``p`` is the prior mean edge rate; must be positive.
    """
    if p <= 0:
        raise ValueError("rate hyperparameter p must be > 0")
    sizes = stats.sizes.astype(np.float64)
    degs = stats.degree_sums.astype(np.float64)
    k = sizes.size
    out = float(np.sum(degs * np.log(sizes) + gammaln(sizes) - gammaln(sizes + degs)))
    mm = np.zeros((k, k))
    for (r, s), w in stats.edge_counts.items():
        mm[r, s] = w
    # strict upper triangle holds m_rs; zero entries still contribute the
    # -(m+1) log(p n_r n_s + 1) baseline, so mask the term matrix, not mm
    nn = p * sizes[:, None] * sizes[None, :] + 1.0
    terms = gammaln(mm + 1.0) - (mm + 1.0) * np.log(nn)
    out += float(np.triu(terms, 1).sum())
    diag = np.diagonal(mm)
    out += float(np.sum(gammaln(diag + 1.0) - (diag + 1.0) * np.log(0.5 * p * sizes**2 + 1.0)))
    return out


def log_posterior(graph, partition, p=None, stats=None):
    """Log of the collapsed posterior (up to an additive constant)."""
    if p is None:
        p = graph.density()
    if stats is None:
        stats = compute_stats(graph, partition)
    return log_prior(partition) + log_likelihood_marginal(graph, stats, p)


def _pair_term(p, na, nb, m):
    return _LG(m + 1.0) - (m + 1.0) * _LN(p * na * nb + 1.0)


def _diag_term(p, na, m):
    return _LG(m + 1.0) - (m + 1.0) * _LN(0.5 * p * na * na + 1.0)


def _comm_term(p, na, kap, mdiag):
    # prior n_r! piece + degree piece + diagonal edge piece
    return (
        _LG(na + 1.0)
        + kap * _LN(na)
        + _LG(na)
        - _LG(na + kap)
        + _diag_term(p, na, mdiag)
    )


def _dense_counts(edge_counts, k):
    """Symmetric k x k edge-count matrix from the sparse mapping."""
    M = np.zeros((k, k), dtype=np.int64)
    for (a, b), w in edge_counts.items():
        M[a, b] = w
        M[b, a] = w
    return M


class PartitionState:
    """Mutable division of one graph with incrementally maintained stats.

    Holds the label vector, group statistics, and a cached log posterior;
    ``delta`` scores a single-node move without mutating, ``apply`` commits
    one and keeps everything consistent, eagerly compacting labels when a
    community empties (the last label is renumbered into the gap).

    Chain-local object: never share a PartitionState between threads.
    """

    def __init__(self, graph, partition=None, p=None):
        self.graph = graph
        self.p = graph.density() if p is None else float(p)
        if self.p <= 0:
            raise ValueError("rate hyperparameter p must be > 0")
        if partition is None:
            partition = Partition(np.arange(graph.n), graph.n)
        if partition.n != graph.n:
            raise ValueError("partition does not match graph size")
        self.g = partition.g.copy()
        self.k = partition.k
        stats = compute_stats(graph, partition)
        self.sizes = stats.sizes.copy()
        self.degree_sums = stats.degree_sums.copy()
        self._M = _dense_counts(stats.edge_counts, self.k)
        self.logp = log_posterior(graph, partition, self.p, stats)
        self._indptr, self._indices, self._mults, self._loops = graph.neighbor_arrays()

    # -- queries ---------------------------------------------------------

    def partition(self):
        return Partition(self.g.copy(), self.k)

    def stats(self):
        k = self.k
        rr, ss = np.nonzero(np.triu(self._M[:k, :k]))
        counts = {(int(a), int(b)): int(self._M[a, b]) for a, b in zip(rr, ss)}
        return GroupStats(self.sizes[:k].copy(), self.degree_sums[:k].copy(), counts)

    def _m(self, a, b):
        return int(self._M[a, b])

    def _edges_to_groups(self, i):
        """Edge multiplicities from node i into each touched community."""
        e = {}
        for pos in range(self._indptr[i], self._indptr[i + 1]):
            s = int(self.g[self._indices[pos]])
            e[s] = e.get(s, 0) + int(self._mults[pos])
        return e

    def delta(self, node, target):
        """Change in log posterior if ``node`` moved to ``target``.

        ``target`` may be an existing community, ``k`` or NEW_COMMUNITY for
        a fresh one.  Moving a node onto its own community returns 0.0.
        """
        i = int(node)
        r = int(self.g[i])
        k = self.k
        fresh = target == NEW_COMMUNITY or target == k
        t = k if fresh else int(target)
        if not fresh and not (0 <= t < k):
            raise ValueError(f"target {target} is not an existing community")
        if t == r:
            return 0.0
        nr = int(self.sizes[r])
        if fresh and nr == 1:
            return 0.0  # singleton to fresh recreates the same division
        p = self.p
        n = self.graph.n
        e = self._edges_to_groups(i)
        loops = int(self._loops[i])
        di = int(self.graph.degrees[i])
        er = e.get(r, 0)
        et = e.get(t, 0) if not fresh else 0
        nt = int(self.sizes[t]) if not fresh else 0
        kr = int(self.degree_sums[r])
        kt = int(self.degree_sums[t]) if not fresh else 0
        mrr = self._m(r, r)
        mtt = self._m(t, t) if not fresh else 0
        mrt = self._m(r, t) if not fresh else 0
        r_survives = nr > 1

        before = _comm_term(p, nr, kr, mrr)
        after = 0.0
        if not fresh:
            before += _comm_term(p, nt, kt, mtt)
            before += _pair_term(p, nr, nt, mrt)
        if r_survives:
            after += _comm_term(p, nr - 1, kr - di, mrr - er - loops)
            after += _pair_term(p, nr - 1, nt + 1, mrt + er - et)
        after += _comm_term(p, nt + 1, kt + di, mtt + et + loops)
        # pair terms against every other group: a scalar loop wins at small
        # k, the vectorized form at large k (numpy call overhead crossover)
        if k <= 24:
            # _pair_term inlined: this loop dominates small-k move cost
            M = self._M
            sz = self.sizes
            eget = e.get
            lg = _LG
            ln = _LN
            for s in range(k):
                if s == r or s == t:
                    continue
                ns = int(sz[s])
                es = eget(s, 0)
                mrs = int(M[r, s])
                mts = 0 if fresh else int(M[t, s])
                before += lg(mrs + 1.0) - (mrs + 1.0) * ln(p * nr * ns + 1.0)
                if not fresh:
                    before += lg(mts + 1.0) - (mts + 1.0) * ln(p * nt * ns + 1.0)
                if r_survives:
                    mo = mrs - es
                    after += lg(mo + 1.0) - (mo + 1.0) * ln(p * (nr - 1) * ns + 1.0)
                mi = mts + es
                after += lg(mi + 1.0) - (mi + 1.0) * ln(p * (nt + 1) * ns + 1.0)
        else:
            mask = np.ones(k, dtype=bool)
            mask[r] = False
            if not fresh:
                mask[t] = False
            ns = self.sizes[:k][mask].astype(np.float64)
            mrs = self._M[r, :k][mask].astype(np.float64)
            ev = np.zeros(k)
            for s, es in e.items():
                ev[s] = es
            ev = ev[mask]
            before += float(np.sum(gammaln(mrs + 1.0) - (mrs + 1.0) * np.log(p * nr * ns + 1.0)))
            if fresh:
                mts = np.zeros(ns.size)
            else:
                mts = self._M[t, :k][mask].astype(np.float64)
                before += float(np.sum(gammaln(mts + 1.0) - (mts + 1.0) * np.log(p * nt * ns + 1.0)))
            if r_survives:
                out = mrs - ev
                after += float(np.sum(gammaln(out + 1.0) - (out + 1.0) * np.log(p * (nr - 1.0) * ns + 1.0)))
            inc = mts + ev
            after += float(np.sum(gammaln(inc + 1.0) - (inc + 1.0) * np.log(p * (nt + 1.0) * ns + 1.0)))
        k_after = k + (1 if fresh else 0) - (0 if r_survives else 1)
        return after - before - (k_after - k) * _LN(n)

    # -- mutation --------------------------------------------------------

    def apply(self, node, target, delta=None):
        """Commit a move, updating stats and cached log posterior.

        ``delta`` may carry a precomputed ``delta(node, target)`` value to
        skip rescoring the move, the usual pattern in a sampling loop.
        """
        i = int(node)
        r = int(self.g[i])
        k = self.k
        fresh = target == NEW_COMMUNITY or target == k
        t = k if fresh else int(target)
        if t == r:
            return
        if fresh and int(self.sizes[r]) == 1:
            return
        d = self.delta(i, target) if delta is None else delta
        e = self._edges_to_groups(i)
        loops = int(self._loops[i])
        di = int(self.graph.degrees[i])
        if fresh:
            if self.sizes.size <= t:
                self.sizes = np.append(self.sizes, 0)
                self.degree_sums = np.append(self.degree_sums, 0)
            else:
                self.sizes[t] = 0
                self.degree_sums[t] = 0
            if self._M.shape[0] <= t:
                grown = np.zeros((t + 8, t + 8), dtype=np.int64)
                grown[: self._M.shape[0], : self._M.shape[0]] = self._M
                self._M = grown
            else:
                self._M[t, :] = 0
                self._M[:, t] = 0
            self.k = k + 1
        er = e.get(r, 0)
        et = e.get(t, 0)
        for s, es in e.items():
            if s == r or s == t:
                continue
            self._m_add(r, s, -es)
            self._m_add(t, s, es)
        self._m_add(r, r, -(er + loops))
        self._m_add(t, t, et + loops)
        self._m_add(r, t, er - et)
        self.g[i] = t
        self.sizes[r] -= 1
        self.sizes[t] += 1
        self.degree_sums[r] -= di
        self.degree_sums[t] += di
        if self.sizes[r] == 0:
            last = self.k - 1
            if last != r:
                self._rename(last, r)
            self.k -= 1
        self.logp += d

    def _m_add(self, a, b, amount):
        if amount == 0:
            return
        self._M[a, b] += amount
        if a != b:
            self._M[b, a] += amount

    def _rename(self, old, new):
        # the row for `new` holds all zeros here: that group just died
        self.g[self.g == old] = new
        self.sizes[new] = self.sizes[old]
        self.degree_sums[new] = self.degree_sums[old]
        k = self.k
        M = self._M
        row = M[old, :k].copy()
        row[new] = row[old]
        row[old] = 0
        M[old, :k] = 0
        M[:k, old] = 0
        M[new, :k] = row
        M[:k, new] = row

    def resync(self):
        """Recompute stats and log posterior from scratch; returns drift."""
        part = self.partition()
        stats = compute_stats(self.graph, part)
        fresh_logp = log_posterior(self.graph, part, self.p, stats)
        drift = abs(fresh_logp - self.logp)
        self.sizes = stats.sizes.copy()
        self.degree_sums = stats.degree_sums.copy()
        self._M = _dense_counts(stats.edge_counts, self.k)
        self.logp = fresh_logp
        return drift


def delta_log_posterior(graph, partition, stats, node, target, p=None):
    """Score a single-node move against explicit (partition, stats).

    Convenience wrapper over PartitionState for one-shot evaluation; for
    long move sequences build the state once and use ``delta``/``apply``.
    """
    if p is None:
        p = graph.density()
    state = PartitionState.__new__(PartitionState)
    state.graph = graph
    state.p = float(p)
    state.g = partition.g
    state.k = partition.k
    state.sizes = stats.sizes
    state.degree_sums = stats.degree_sums
    state._M = _dense_counts(stats.edge_counts, partition.k)
    state._indptr, state._indices, state._mults, state._loops = graph.neighbor_arrays()
    return state.delta(node, target)
