"""Invariant building blocks of a sample ensemble by greedy merging.

Starting from every node in its own block, repeatedly merge the pair of
blocks that most increases the ensemble-averaged reduced mutual
information between the block division and the sampled divisions,
recording the average at every block count down to one.  The groups at
the peak are the structure the whole posterior agrees on: nodes that the
sampled divisions keep together regardless of how the divisions differ
elsewhere.

Two evaluation paths give the same merges.  The generic path scores a
candidate merge by recomputing the averaged information directly, with
Omega handled per ``rmi``; affordable only for small ensembles.  The
fast path expands the average under the margin-product Omega estimate
into per-pair terms plus a round constant, so one round needs only the
scores of pairs touching the last merged block.  Block counts one and n
are trivial divisions whose information is identically zero, and both
paths pin them to exact zeros.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln

from . import rmi
from ._backend import GreedyColumns


class MergeTrace:
    """Averaged information per block count, best-first merge order.

    Row for block count q holds the merge performed to reach q from
    q + 1 (labels in the convention below; -1 -1 for the starting row
    q = n).  Merging pair (i, j) with i < j keeps label i for the merged
    block and shifts labels above j down by one.
    """

    def __init__(self, q, value, merged_a, merged_b):
        self.q = np.asarray(q, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64)
        self.merged_a = np.asarray(merged_a, dtype=np.int64)
        self.merged_b = np.asarray(merged_b, dtype=np.int64)

    def best_q(self):
        """Block count with the highest average; largest q wins ties."""
        return int(self.q[int(np.argmax(self.value))])

    def write_csv(self, stream):
        stream.write("q,mean_rmi,merged_a,merged_b\n")
        for i in range(self.q.size):
            a = "" if self.merged_a[i] < 0 else str(self.merged_a[i])
            b = "" if self.merged_b[i] < 0 else str(self.merged_b[i])
            stream.write(f"{self.q[i]},{float(self.value[i])!r},{a},{b}\n")


class BlockResult:
    """Greedy merge history over an ensemble, replayable at any q."""

    def __init__(self, n, merges, trace):
        self.n = int(n)
        self.merges = list(merges)
        self.trace = trace

    def labels_at(self, q):
        """Block label per node after merging down to q blocks."""
        if not 1 <= q <= self.n:
            raise ValueError(f"block count must be in 1..{self.n}")
        blocks = [[i] for i in range(self.n)]
        for i, j in self.merges[: self.n - q]:
            blocks[i].extend(blocks[j])
            del blocks[j]
        out = np.empty(self.n, dtype=np.int64)
        for lab, members in enumerate(blocks):
            out[members] = lab
        return out

    def best_q(self):
        return self.trace.best_q()

    def labels(self):
        """Block label per node at the peak of the trace."""
        return self.labels_at(self.best_q())


def _canonical_rows(samples):
    samples = np.asarray(samples)
    if samples.ndim != 2 or samples.shape[0] == 0:
        raise ValueError("samples must be a nonempty (records, n) array")
    out = np.empty(samples.shape, dtype=np.int64)
    ks = np.empty(samples.shape[0], dtype=np.int64)
    for r in range(samples.shape[0]):
        _, inv = np.unique(samples[r], return_inverse=True)
        out[r] = inv
        ks[r] = inv.max() + 1
    return out, ks


def _argmax_pair(score, q):
    """First strict maximum scanning pairs (a, b), a < b, in label order."""
    best = -np.inf
    at = (0, 1)
    for a in range(q - 1):
        row = score[a]
        for b in range(a + 1, q):
            if row[b] > best:
                best = row[b]
                at = (a, b)
    return at


def greedy_blocks(samples, method="auto", max_samples=None,
                  mode="approx", limit=rmi.EXACT_LIMIT):
    """Merge singleton blocks greedily against a sample ensemble.

    method "fast" uses the separable per-pair expansion (margin-product
    Omega only), "generic" rescans candidates with ``rmi.mean_rmi``
    under the given Omega ``mode``, and "auto" picks fast.  An even
    subsample of at most ``max_samples`` rows is used when given.
    Returns a BlockResult.
    """
    samples = np.asarray(samples)
    if samples.ndim != 2:
        raise ValueError("samples must be a 2-d array of label vectors")
    if max_samples is not None and samples.shape[0] > max_samples:
        stride = -(-samples.shape[0] // int(max_samples))
        samples = samples[::stride]
    if method == "auto":
        method = "fast"
    if method == "fast":
        if mode != "approx":
            raise ValueError("the fast path implies the Omega estimate")
        return _greedy_fast(samples)
    if method == "generic":
        return _greedy_generic(samples, mode=mode, limit=limit)
    raise ValueError(f"unknown method {method!r}")


def _greedy_fast(samples):
    cano, ks = _canonical_rows(samples)
    ns, n = cano.shape
    kmax = int(ks.max())
    lgf = gammaln(np.arange(n * kmax + n + 2, dtype=np.float64) + 1.0)
    cols = GreedyColumns(cano, lgf)

    kcount = np.bincount(ks, minlength=kmax + 1).astype(np.float64)
    sizes_all = np.concatenate([np.bincount(row)[np.bincount(row) > 0] for row in cano]) \
        if ns else np.zeros(0, dtype=np.int64)
    acount = np.bincount(sizes_all, minlength=n + 1).astype(np.float64)
    sumSA = float((acount * lgf[: n + 1]).sum())

    kv = np.nonzero(kcount)[0]
    kw = kcount[kv]

    # W[x] = sum_r log C(x + k_r - 1, k_r - 1), the block-size leg of the
    # Omega estimate summed over samples
    xs = np.arange(n + 1, dtype=np.int64)
    W = np.zeros(n + 1)
    for k, wgt in zip(kv, kw):
        W[1:] += wgt * (lgf[xs[1:] + k - 1] - lgf[xs[1:]] - lgf[k - 1])

    av = np.nonzero(acount)[0]
    aw = acount[av]

    def AQ(q):
        return float((aw * (lgf[av + q - 1] - lgf[av] - lgf[q - 1])).sum())

    def CGsum(q):
        return float((kw * (lgf[n + kv * q - 1] - lgf[n] - lgf[kv * q - 1])).sum())

    def trace_value(q, sumT, SB, SW):
        if q == 1 or q == n:
            return 0.0  # trivial division: information exactly zero
        return (ns * lgf[n] + sumT - sumSA - ns * SB - AQ(q) - SW + CGsum(q)) / (ns * n)

    def score_of(i, j, bi, bj):
        pair_w = W[bi + bj] - W[bi] - W[bj]
        pair_b = lgf[bi + bj] - lgf[bi] - lgf[bj]
        return cols.pairsum(i, j) - pair_w - ns * pair_b

    b = np.ones(n, dtype=np.int64)
    score = np.full((n, n), -np.inf)
    for i in range(n - 1):
        for j in range(i + 1, n):
            score[i, j] = score_of(i, j, b[i], b[j])

    sumT = 0.0
    SB = 0.0
    SW = float(n * W[1])
    qs = [n]
    vals = [trace_value(n, sumT, SB, SW)]
    ma = [-1]
    mb = [-1]
    merges = []
    q = n
    while q > 1:
        i, j = _argmax_pair(score, q)
        pair = cols.pairsum(i, j)
        sumT += pair
        SB += lgf[b[i] + b[j]] - lgf[b[i]] - lgf[b[j]]
        SW += W[b[i] + b[j]] - W[b[i]] - W[b[j]]
        b[i] += b[j]
        b = np.delete(b, j)
        cols.merge(i, j)
        score = np.delete(np.delete(score, j, axis=0), j, axis=1)
        q -= 1
        for h in range(q):
            if h == i:
                continue
            x, y = (h, i) if h < i else (i, h)
            score[x, y] = score_of(x, y, b[x], b[y])
        merges.append((i, j))
        qs.append(q)
        vals.append(trace_value(q, sumT, SB, SW))
        ma.append(i)
        mb.append(j)
    return BlockResult(n, merges, MergeTrace(qs, vals, ma, mb))


def _greedy_generic(samples, mode="auto", limit=rmi.EXACT_LIMIT):
    samples = np.asarray(samples)
    ns, n = samples.shape

    def mean_against(labels):
        return rmi.mean_rmi(samples, labels, mode=mode, limit=limit)

    def labels_from(blocks):
        out = np.empty(n, dtype=np.int64)
        for lab, members in enumerate(blocks):
            out[members] = lab
        return out

    blocks = [[i] for i in range(n)]
    qs = [n]
    vals = [0.0]  # all singletons: trivial division
    ma = [-1]
    mb = [-1]
    merges = []
    q = n
    while q > 1:
        best = -np.inf
        at = (0, 1)
        for i in range(q - 1):
            for j in range(i + 1, q):
                trial = blocks[:i] + [blocks[i] + blocks[j]] + blocks[i + 1:j] + blocks[j + 1:]
                v = mean_against(labels_from(trial))
                if v > best:
                    best = v
                    at = (i, j)
        i, j = at
        blocks[i] = blocks[i] + blocks[j]
        del blocks[j]
        q -= 1
        merges.append((i, j))
        qs.append(q)
        vals.append(0.0 if q in (1, n) else best)
        ma.append(i)
        mb.append(j)
    return BlockResult(n, merges, MergeTrace(qs, vals, ma, mb))


def describe_division(block_labels, division):
    """Match blocks to a division by plurality vote.

    Each block is assigned the community holding most of its nodes (the
    lower community index on ties); returns (community per block,
    misfit count, misfit node mask), where a misfit sits in a block
    whose plurality community is not its own.
    """
    block_labels = np.asarray(block_labels, dtype=np.int64)
    division = np.asarray(division, dtype=np.int64)
    if block_labels.shape != division.shape:
        raise ValueError("need matching label vectors")
    nb = int(block_labels.max()) + 1
    nc = int(division.max()) + 1
    table = np.zeros((nb, nc), dtype=np.int64)
    np.add.at(table, (block_labels, division), 1)
    plurality = table.argmax(axis=1)
    misfit = plurality[block_labels] != division
    return plurality, int(misfit.sum()), misfit
