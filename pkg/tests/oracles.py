"""Brute-force reference implementations the tests trust.

Everything here is written for clarity over speed and restricted to
sizes where exhaustive enumeration is feasible.  The library must agree
with these; the reverse dependency is forbidden (nothing here imports
beyond blockkit's public posterior evaluator, which is itself pinned
against hand-evaluated constants elsewhere).
"""

import math

import numpy as np
from scipy.special import gammaln as sp_gammaln

from blockkit import Partition, log_posterior


def set_partitions(n):
    """All set partitions of range(n) as canonical label vectors.

    Canonical means labels appear in first-use order (restricted growth
    strings), so each set partition occurs exactly once.
    """
    g = [0] * n

    def rec(i, kmax):
        if i == n:
            yield tuple(g)
            return
        for lab in range(kmax + 1):
            g[i] = lab
            yield from rec(i + 1, max(kmax, lab + 1))

    yield from rec(1, 1)


def posterior_table(graph, p=None):
    """Map canonical label tuple -> probability mass of the set partition.

    Mass is proportional to k! * exp(log_posterior): the chain's states
    are labeled vectors and every set partition with k blocks owns k! of
    them, each carrying the same posterior value.
    """
    logw = {}
    for g in set_partitions(graph.n):
        part = Partition(np.array(g, dtype=np.int64))
        logw[g] = log_posterior(graph, part, p=p) + math.lgamma(part.k + 1)
    top = max(logw.values())
    w = {g: math.exp(v - top) for g, v in logw.items()}
    z = sum(w.values())
    return {g: v / z for g, v in w.items()}


def total_variation(p, q):
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def canonical_tuple(labels):
    """Relabel a vector into first-use order, as a hashable tuple."""
    seen = {}
    out = []
    for x in labels:
        x = int(x)
        if x not in seen:
            seen[x] = len(seen)
        out.append(seen[x])
    return tuple(out)


def brute_omega(a, b):
    """Count non-negative integer matrices with row sums a, column sums b."""
    a, b = list(a), list(b)
    if sum(a) != sum(b):
        return 0
    if len(a) == 1:
        return 1

    count = 0
    # enumerate the first row, recurse on the rest
    for row in bounded_rows(a[0], b):
        rest = [bi - ri for bi, ri in zip(b, row)]
        count += brute_omega(a[1:], rest)
    return count


def bounded_rows(total, caps):
    """All non-negative integer vectors summing to total with v_i <= caps_i."""
    if len(caps) == 1:
        if 0 <= total <= caps[0]:
            yield (total,)
        return
    for v in range(min(total, caps[0]) + 1):
        for rest in bounded_rows(total - v, caps[1:]):
            yield (v,) + rest


def brute_tables(a, b):
    """Materialize every table counted by brute_omega (tiny margins only)."""
    a, b = list(a), list(b)
    if len(a) == 1:
        if all(x >= 0 for x in b) and sum(b) == a[0]:
            yield (tuple(b),)
        return
    for row in bounded_rows(a[0], b):
        rest = [bi - ri for bi, ri in zip(b, row)]
        for tail in brute_tables(a[1:], rest):
            yield (tuple(row),) + tail


def rmi_direct(c):
    """Eq.-by-the-book reduced mutual information with brute-force omega."""
    c = np.asarray(c, dtype=np.int64)
    a = c.sum(axis=1)
    b = c.sum(axis=0)
    n = int(c.sum())
    log_mi = (
        math.lgamma(n + 1)
        + sum(math.lgamma(int(x) + 1) for x in c.ravel())
        - sum(math.lgamma(int(x) + 1) for x in a)
        - sum(math.lgamma(int(x) + 1) for x in b)
    )
    return (log_mi - math.log(brute_omega(a.tolist(), b.tolist()))) / n


def mean_rmi_direct(samples, reference):
    return float(np.mean([
        rmi_direct(contingency_direct(s, reference)) for s in samples
    ]))


def contingency_direct(g1, g2):
    g1 = np.asarray(g1)
    g2 = np.asarray(g2)
    rows = sorted(set(g1.tolist()))
    cols = sorted(set(g2.tolist()))
    c = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for x, y in zip(g1, g2):
        c[rows.index(int(x)), cols.index(int(y))] += 1
    return c


def random_margins(rng, n_max=12):
    """A random pair of margins sharing a total, for estimator stress tests."""
    n = int(rng.integers(2, n_max + 1))
    k = int(rng.integers(1, min(n, 5) + 1))
    q = int(rng.integers(1, min(n, 5) + 1))
    a = random_composition(rng, n, k)
    b = random_composition(rng, n, q)
    return a, b


def random_composition(rng, n, k):
    """n as an unordered sum of k positive parts, uniformly via stars/bars."""
    if k == 1:
        return [n]
    cuts = np.sort(rng.choice(np.arange(1, n), size=k - 1, replace=False))
    parts = np.diff(np.concatenate(([0], cuts, [n])))
    return [int(x) for x in parts]


_TRIU_CACHE = {}
_EDGE_CACHE = {}


def _triu1(k):
    if k not in _TRIU_CACHE:
        _TRIU_CACHE[k] = np.triu_indices(k, 1)
    return _TRIU_CACHE[k]


def _edge_view(graph):
    # label-independent arrays; diagonal adjacency carries two per loop
    key = id(graph)
    if key not in _EDGE_CACHE:
        u, v, w = graph.edge_arrays()
        wc = np.where(u == v, w // 2, w).astype(np.float64)
        _EDGE_CACHE[key] = (u, v, wc, graph.degrees.astype(np.float64))
    return _EDGE_CACHE[key]


def vector_log_posterior(graph, labels, p=None):
    """Full posterior recomputation from scratch, sharing no library code.

    Builds group sizes, degree sums, and the edge-count matrix with
    bincount and evaluates every term of the marginalized posterior in
    one vectorized pass.  Fast enough to run after each of 10^5 moves,
    unlike the enumeration-grade helpers above.
    """
    g = np.asarray(labels, dtype=np.int64)
    n = graph.n
    k = int(g.max()) + 1
    if p is None:
        p = 2.0 * graph.m / (n * n)
    u, v, wc, deg = _edge_view(graph)
    sizes = np.bincount(g, minlength=k).astype(np.float64)
    kappa = np.bincount(g, weights=deg, minlength=k)
    gu, gv = g[u], g[v]
    lo = np.minimum(gu, gv)
    hi = np.maximum(gu, gv)
    t = np.bincount(lo * k + hi, weights=wc, minlength=k * k).reshape(k, k)
    ru, cu = _triu1(k)
    tv = t[ru, cu]
    diag = t.ravel()[:: k + 1]
    # one gammaln / one log evaluation over every term's argument
    lgs = sp_gammaln(np.concatenate(
        (sizes + 1.0, sizes, sizes + kappa, tv + 1.0, diag + 1.0)))
    logs = np.log(np.concatenate(
        (sizes, p * (sizes[ru] * sizes[cu]) + 1.0,
         0.5 * p * sizes * sizes + 1.0)))
    npair = tv.size
    out = -k * math.log(n)
    out += float(lgs[:k].sum())                                # prior n_r!
    out += float((kappa * logs[:k]).sum()
                 + lgs[k:2 * k].sum() - lgs[2 * k:3 * k].sum())
    out += float(lgs[3 * k:3 * k + npair].sum()
                 - ((tv + 1.0) * logs[k:k + npair]).sum())
    out += float(lgs[3 * k + npair:].sum()
                 - ((diag + 1.0) * logs[k + npair:]).sum())
    return out
