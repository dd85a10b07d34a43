"""Pure-Python backend: chain kernel and merge-score columns.

Reference implementation of the two hot kernels.  The compiled module
implements the same contracts; which one a session gets is decided once
at import in ``_backend``.  Keep the observable behavior of the two in
lockstep: same proposal arithmetic, same draw ordering, same column and
label conventions.

Random-number contract for one chain step, drawn from a PCG64 stream as
consecutive doubles:

    u1 -> node   i = int(u1 * n)
    u2 -> target t = int(u2 * (k + 1)),  t == k meaning "fresh community"
    u3 -> accept test, u3 < exp(min(0, logratio))

Holds (t equal to the node's community, or a fresh proposal for a node
already alone) consume no third draw.  The acceptance ratio on top of
the posterior delta carries the proposal asymmetry and the count of
label assignments per division:

    logratio = delta + log(k+1) - log(k'+1) + log k'! - log k!

so that a division with k communities is visited in proportion to
k! times its posterior weight, matching direct enumeration over
divisions rather than over labelings.
"""

from __future__ import annotations

import math

import numpy as np

from .partition import Partition, PartitionState

_DRAW_BUF = 8192


class _DoubleStream:
    """Buffered consecutive doubles from one PCG64 stream."""

    def __init__(self, seed):
        self._gen = np.random.Generator(np.random.PCG64(seed))
        self._buf = self._gen.random(_DRAW_BUF)
        self._pos = 0

    def next(self):
        if self._pos == self._buf.size:
            self._buf = self._gen.random(_DRAW_BUF)
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u


def canonical_code(g, k):
    """Pack a division of up to 16 nodes into an int, label-order free.

    Communities are renumbered in first-appearance order and each node's
    label is stored in 4 bits, so two labelings of the same division map
    to the same code.
    """
    n = len(g)
    if n > 16 or k > 16:
        raise ValueError("canonical codes only cover n <= 16")
    relab = [-1] * k
    nxt = 0
    code = 0
    for i in range(n):
        lab = relab[g[i]]
        if lab < 0:
            lab = relab[g[i]] = nxt
            nxt += 1
        code |= lab << (4 * i)
    return code


def run_chain(graph, g0=None, p=None, steps=0, seed=0, burn_in=0, thin=1,
              tally=False, resync_every=1_000_000):
    """Run one chain; return final state, thinned records, and counters.

    Records are taken at steps s with s > burn_in and (s - burn_in)
    divisible by thin.  With ``tally`` the post-burn-in visit counts per
    division (holds included) are accumulated under canonical codes;
    only graphs of at most 12 nodes accept it.
    """
    n = graph.n
    if tally and n > 12:
        raise ValueError("visit tally supported only for n <= 12")
    if thin < 1 or burn_in < 0 or steps < 0:
        raise ValueError("steps, burn_in, thin must be nonnegative with thin >= 1")
    part = Partition(np.arange(n), n) if g0 is None else Partition(np.asarray(g0))
    state = PartitionState(graph, part, p)
    stream = _DoubleStream(seed)
    lgk = np.append(0.0, np.cumsum(np.log(np.arange(1, n + 2, dtype=np.float64))))
    nrec = (steps - burn_in) // thin if steps > burn_in else 0
    rec_steps = np.zeros(nrec, dtype=np.int64)
    rec_logp = np.zeros(nrec, dtype=np.float64)
    rec_g = np.zeros((nrec, n), dtype=np.int32)
    rec_k = np.zeros(nrec, dtype=np.int32)
    visits = {} if tally else None
    proposals = 0
    accepts = 0
    max_drift = 0.0
    ptr = 0
    for s in range(1, steps + 1):
        k = state.k
        i = int(stream.next() * n)
        t = int(stream.next() * (k + 1))
        r = int(state.g[i])
        hold = t == r or (t == k and int(state.sizes[r]) == 1)
        if not hold:
            proposals += 1
            k_after = k + (1 if t == k else 0) - (1 if int(state.sizes[r]) == 1 else 0)
            d = state.delta(i, t)
            logratio = (d
                        + math.log(k + 1.0) - math.log(k_after + 1.0)
                        + lgk[k_after] - lgk[k])
            u = stream.next()
            if logratio >= 0.0 or u < math.exp(logratio):
                state.apply(i, t, delta=d)
                accepts += 1
        if resync_every and s % resync_every == 0:
            max_drift = max(max_drift, state.resync())
        if s > burn_in:
            if tally:
                code = canonical_code(state.g, state.k)
                visits[code] = visits.get(code, 0) + 1
            if (s - burn_in) % thin == 0 and ptr < nrec:
                rec_steps[ptr] = s
                rec_logp[ptr] = state.logp
                rec_g[ptr] = state.g
                rec_k[ptr] = state.k
                ptr += 1
    max_drift = max(max_drift, state.resync())
    return {
        "g": state.g.copy(),
        "k": state.k,
        "logp": state.logp,
        "rec_steps": rec_steps,
        "rec_logp": rec_logp,
        "rec_g": rec_g,
        "rec_k": rec_k,
        "visits": visits,
        "proposals": proposals,
        "accepts": accepts,
        "max_drift": max_drift,
    }


class GreedyColumns:
    """Per-block sparse count columns over a sample ensemble.

    Column h holds, for every sample r and community g, the number of
    nodes of block h assigned to g in sample r, as parallel sorted-key
    arrays with key = r * 2^20 + g.  Supports the two operations the
    merge loop needs: a pair overlap score and an in-place merge.
    """

    _SHIFT = 20

    def __init__(self, samples, lgf):
        samples = np.asarray(samples, dtype=np.int64)
        if samples.ndim != 2:
            raise ValueError("samples must be a 2-d array of labels")
        ns, n = samples.shape
        if (samples >= 1 << self._SHIFT).any():
            raise ValueError("community labels too large for key packing")
        self._lgf = np.asarray(lgf, dtype=np.float64)
        rbase = np.arange(ns, dtype=np.int64) << self._SHIFT
        self._keys = [rbase + samples[:, h] for h in range(n)]
        self._vals = [np.ones(ns, dtype=np.int64) for _ in range(n)]

    def ncols(self):
        return len(self._keys)

    def pairsum(self, i, j):
        """sum_r sum_g  lgf[c_i + c_j] - lgf[c_i] - lgf[c_j].

        Keys present in only one column contribute zero, so this reduces
        to the sorted-key intersection of the two columns.
        """
        common, ia, ib = np.intersect1d(
            self._keys[i], self._keys[j], assume_unique=True, return_indices=True
        )
        if common.size == 0:
            return 0.0
        va = self._vals[i][ia]
        vb = self._vals[j][ib]
        lgf = self._lgf
        return float((lgf[va + vb] - lgf[va] - lgf[vb]).sum())

    def merge(self, i, j):
        """Fold column j into column i (i < j) and drop column j."""
        if not i < j < len(self._keys):
            raise ValueError("need i < j < ncols")
        keys = np.concatenate([self._keys[i], self._keys[j]])
        vals = np.concatenate([self._vals[i], self._vals[j]])
        uk, inv = np.unique(keys, return_inverse=True)
        uv = np.bincount(inv, weights=vals).astype(np.int64)
        self._keys[i] = uk
        self._vals[i] = uv
        del self._keys[j]
        del self._vals[j]
