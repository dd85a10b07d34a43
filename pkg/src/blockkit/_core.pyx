# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled chain kernel and merge-score columns.

Mirror of ``_pycore``: same draw contract, same acceptance arithmetic,
same label compaction, same column conventions.  Divergence between the
two backends is a bug; the parity tests hold them together.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from cython.operator cimport dereference as deref, preincrement as inc
from libc.math cimport exp, log
from libcpp.map cimport map as cppmap
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector

cnp.import_array()

cdef extern from "numpy/random/bitgen.h":
    ctypedef struct bitgen_t:
        void *state
        unsigned long long (*next_uint64)(void *st) noexcept nogil
        unsigned int (*next_uint32)(void *st) noexcept nogil
        double (*next_double)(void *st) noexcept nogil
        unsigned long long (*next_raw)(void *st) noexcept nogil

ctypedef unordered_map[long, long] lmap
ctypedef unsigned long long u64


cdef class _Chain:
    """Mutable division with incremental statistics, all in C storage."""

    cdef long n, k
    cdef double p
    cdef double logp
    cdef long[::1] g, sizes, degsums
    cdef long[::1] indptr, indices, mults, loops, degrees
    cdef double[::1] lgf
    cdef vector[lmap] rows          # rows[r][s] = m_rs, symmetric, diag at [r][r]
    cdef long[::1] e                # scratch: edges from current node into each group
    cdef vector[long] touched

    def __cinit__(self, long n):
        self.rows.resize(n + 1)

    cdef long mval(self, long a, long b):
        it = self.rows[a].find(b)
        if it == self.rows[a].end():
            return 0
        return deref(it).second

    cdef void madd(self, long a, long b, long v):
        if v == 0:
            return
        cdef long nv = self.rows[a][b] + v
        if nv == 0:
            self.rows[a].erase(b)
            if a != b:
                self.rows[b].erase(a)
        else:
            self.rows[a][b] = nv
            if a != b:
                self.rows[b][a] = nv

    cdef void build_e(self, long i):
        cdef long pos, s
        for pos in range(self.indptr[i], self.indptr[i + 1]):
            s = self.g[self.indices[pos]]
            if self.e[s] == 0:
                self.touched.push_back(s)
            self.e[s] += self.mults[pos]

    cdef void clear_e(self):
        cdef size_t idx
        for idx in range(self.touched.size()):
            self.e[self.touched[idx]] = 0
        self.touched.clear()

    cdef double comm_term(self, long na, long kap, long md):
        # size factorial + degree piece + internal edge piece of one group
        return (self.lgf[na] + kap * log(<double>na) + self.lgf[na - 1]
                - self.lgf[na + kap - 1]
                + self.lgf[md] - (md + 1.0) * log(0.5 * self.p * na * na + 1.0))

    cdef double delta(self, long i, long t, bint fresh):
        """Posterior change for moving node i; expects e already built."""
        cdef long r = self.g[i]
        cdef long nr = self.sizes[r]
        cdef long kr = self.degsums[r]
        cdef long di = self.degrees[i]
        cdef long lp = self.loops[i]
        cdef bint surv = nr > 1
        cdef long er = self.e[r]
        cdef long nt, kt, mtt, mrt, et
        cdef long mrr = self.mval(r, r)
        cdef double pp = self.p
        cdef double before, after, acc
        cdef long s, ns, m, es
        cdef size_t idx
        if fresh:
            nt = 0; kt = 0; mtt = 0; mrt = 0; et = 0
        else:
            nt = self.sizes[t]; kt = self.degsums[t]
            mtt = self.mval(t, t); mrt = self.mval(r, t); et = self.e[t]
        before = self.comm_term(nr, kr, mrr)
        after = self.comm_term(nt + 1, kt + di, mtt + et + lp)
        if not fresh:
            before += self.comm_term(nt, kt, mtt)
            before += self.lgf[mrt] - (mrt + 1.0) * log(pp * nr * nt + 1.0)
        if surv:
            after += self.comm_term(nr - 1, kr - di, mrr - er - lp)
            m = mrt + er - et
            after += self.lgf[m] - (m + 1.0) * log(pp * (nr - 1.0) * (nt + 1.0) + 1.0)
        # pair terms against every other group, split into the m = 0
        # baseline over all s and sparse corrections over nonzero m
        acc = 0.0
        for s in range(self.k):
            if s == r or s == t:
                continue
            ns = self.sizes[s]
            if surv:
                acc -= log(pp * (nr - 1.0) * ns + 1.0)
            acc += log(pp * (<double>nr) * ns + 1.0)
            acc -= log(pp * (nt + 1.0) * ns + 1.0)
            if not fresh:
                acc += log(pp * (<double>nt) * ns + 1.0)
        it = self.rows[r].begin()
        while it != self.rows[r].end():
            s = deref(it).first
            m = deref(it).second
            inc(it)
            if s == r or s == t:
                continue
            ns = self.sizes[s]
            acc -= self.lgf[m] - m * log(pp * (<double>nr) * ns + 1.0)
            if surv:
                es = self.e[s]
                acc += self.lgf[m - es] - (m - es) * log(pp * (nr - 1.0) * ns + 1.0)
        if not fresh:
            it = self.rows[t].begin()
            while it != self.rows[t].end():
                s = deref(it).first
                m = deref(it).second
                inc(it)
                if s == r or s == t:
                    continue
                ns = self.sizes[s]
                es = self.e[s]
                acc -= self.lgf[m] - m * log(pp * (<double>nt) * ns + 1.0)
                acc += self.lgf[m + es] - (m + es) * log(pp * (nt + 1.0) * ns + 1.0)
        for idx in range(self.touched.size()):
            s = self.touched[idx]
            if s == r or s == t:
                continue
            if not fresh and self.mval(t, s) != 0:
                continue  # handled by the row t sweep
            es = self.e[s]
            acc += self.lgf[es] - es * log(pp * (nt + 1.0) * self.sizes[s] + 1.0)
        cdef long k_after = self.k + (1 if fresh else 0) - (0 if surv else 1)
        return after - before + acc - (k_after - self.k) * log(<double>self.n)

    cdef void apply(self, long i, long t, bint fresh):
        """Commit the move; expects e already built for node i."""
        cdef long r = self.g[i]
        cdef long di = self.degrees[i]
        cdef long lp = self.loops[i]
        cdef long er = self.e[r]
        cdef long et
        cdef long s, last
        cdef size_t idx
        if fresh:
            t = self.k
            self.sizes[t] = 0
            self.degsums[t] = 0
            self.rows[t].clear()
            self.k += 1
        et = self.e[t]
        for idx in range(self.touched.size()):
            s = self.touched[idx]
            if s == r or s == t:
                continue
            self.madd(r, s, -self.e[s])
            self.madd(t, s, self.e[s])
        self.madd(r, r, -(er + lp))
        self.madd(t, t, et + lp)
        self.madd(r, t, er - et)
        self.g[i] = t
        self.sizes[r] -= 1
        self.sizes[t] += 1
        self.degsums[r] -= di
        self.degsums[t] += di
        if self.sizes[r] == 0:
            last = self.k - 1
            if last != r:
                self.rename(last, r)
            self.k -= 1

    cdef void rename(self, long old, long new):
        # the row for `new` is empty here: that group just died
        cdef long s, w, j
        it = self.rows[old].begin()
        while it != self.rows[old].end():
            s = deref(it).first
            w = deref(it).second
            inc(it)
            if s == old:
                self.rows[new][new] = w
            else:
                self.rows[new][s] = w
                self.rows[s].erase(old)
                self.rows[s][new] = w
        self.rows[old].clear()
        self.sizes[new] = self.sizes[old]
        self.degsums[new] = self.degsums[old]
        for j in range(self.n):
            if self.g[j] == old:
                self.g[j] = new


cdef u64 canon_code(long[::1] g, long n, long* scratch) noexcept:
    cdef long i, nxt = 0
    cdef u64 code = 0
    for i in range(n):
        scratch[i] = -1
    for i in range(n):
        if scratch[g[i]] < 0:
            scratch[g[i]] = nxt
            nxt += 1
        code |= (<u64>scratch[g[i]]) << (4 * i)
    return code


def run_chain(graph, g0=None, p=None, steps=0, seed=0, burn_in=0, thin=1,
              tally=False, resync_every=1_000_000):
    """Compiled twin of the reference chain runner; see that docstring."""
    from .partition import Partition, compute_stats, log_posterior

    cdef long n = graph.n
    if tally and n > 12:
        raise ValueError("visit tally supported only for n <= 12")
    if thin < 1 or burn_in < 0 or steps < 0:
        raise ValueError("steps, burn_in, thin must be nonnegative with thin >= 1")
    part = Partition(np.arange(n), n) if g0 is None else Partition(np.asarray(g0))
    if part.n != n:
        raise ValueError("partition does not match graph size")
    pval = graph.density() if p is None else float(p)
    if pval <= 0:
        raise ValueError("rate hyperparameter p must be > 0")
    stats = compute_stats(graph, part)

    cdef _Chain ch = _Chain(n)
    ch.n = n
    ch.p = pval
    ch.k = part.k
    garr = part.g.astype(np.int64).copy()
    sz = np.zeros(n + 1, dtype=np.int64)
    ds = np.zeros(n + 1, dtype=np.int64)
    sz[: part.k] = stats.sizes
    ds[: part.k] = stats.degree_sums
    ch.g = garr
    ch.sizes = sz
    ch.degsums = ds
    indptr, indices, mults, loops = graph.neighbor_arrays()
    ch.indptr = indptr
    ch.indices = indices
    ch.mults = mults
    ch.loops = loops
    ch.degrees = graph.degrees
    from scipy.special import gammaln
    lgf_arr = gammaln(np.arange(n + 2 * graph.m + 4, dtype=np.float64) + 1.0)
    ch.lgf = lgf_arr
    earr = np.zeros(n + 1, dtype=np.int64)
    ch.e = earr
    for (a, b), w in stats.edge_counts.items():
        ch.rows[a][b] = w
        if a != b:
            ch.rows[b][a] = w
    ch.logp = log_posterior(graph, part, pval, stats)

    from numpy.random import PCG64
    bitgen_obj = PCG64(seed)
    capsule = bitgen_obj.capsule
    cdef bitgen_t *rng = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")

    cdef long nrec = (steps - burn_in) // thin if steps > burn_in else 0
    rec_steps = np.zeros(nrec, dtype=np.int64)
    rec_logp = np.zeros(nrec, dtype=np.float64)
    rec_g = np.zeros((nrec, n), dtype=np.int32)
    rec_k = np.zeros(nrec, dtype=np.int32)
    cdef long[::1] rsteps = rec_steps
    cdef double[::1] rlogp = rec_logp
    cdef int[:, ::1] rg = rec_g
    cdef int[::1] rk = rec_k

    cdef cppmap[u64, long] vcounts
    cdef bint do_tally = bool(tally)
    scratch_arr = np.zeros(n + 1, dtype=np.int64)
    cdef long[::1] scratch = scratch_arr

    cdef long total = steps
    cdef long burn = burn_in
    cdef long every = thin
    cdef long resync = resync_every if resync_every else 0
    cdef long s_i, i, t, r, k_after, ptr = 0
    cdef long proposals = 0, accepts = 0
    cdef double u, logratio, d, max_drift = 0.0, fresh_logp
    cdef bint fresh, hold
    cdef long col

    for s_i in range(1, total + 1):
        i = <long>(rng.next_double(rng.state) * n)
        t = <long>(rng.next_double(rng.state) * (ch.k + 1))
        r = ch.g[i]
        hold = t == r or (t == ch.k and ch.sizes[r] == 1)
        if not hold:
            proposals += 1
            fresh = t == ch.k
            k_after = ch.k + (1 if fresh else 0) - (1 if ch.sizes[r] == 1 else 0)
            ch.build_e(i)
            d = ch.delta(i, t, fresh)
            logratio = (d + log(ch.k + 1.0) - log(k_after + 1.0)
                        + ch.lgf[k_after] - ch.lgf[ch.k])
            u = rng.next_double(rng.state)
            if logratio >= 0.0 or u < exp(logratio):
                ch.apply(i, t, fresh)
                ch.logp += d
                accepts += 1
            ch.clear_e()
        if resync and s_i % resync == 0:
            poster = Partition(np.asarray(ch.g)[:n].copy(), ch.k)
            fresh_logp = log_posterior(graph, poster, pval)
            if abs(fresh_logp - ch.logp) > max_drift:
                max_drift = abs(fresh_logp - ch.logp)
            ch.logp = fresh_logp
        if s_i > burn:
            if do_tally:
                vcounts[canon_code(ch.g, n, &scratch[0])] += 1
            if (s_i - burn) % every == 0 and ptr < nrec:
                rsteps[ptr] = s_i
                rlogp[ptr] = ch.logp
                for col in range(n):
                    rg[ptr, col] = <int>ch.g[col]
                rk[ptr] = <int>ch.k
                ptr += 1

    poster = Partition(np.asarray(ch.g)[:n].copy(), ch.k)
    fresh_logp = log_posterior(graph, poster, pval)
    if abs(fresh_logp - ch.logp) > max_drift:
        max_drift = abs(fresh_logp - ch.logp)
    ch.logp = fresh_logp

    visits = None
    if do_tally:
        visits = {}
        vit = vcounts.begin()
        while vit != vcounts.end():
            visits[deref(vit).first] = deref(vit).second
            inc(vit)
    return {
        "g": np.asarray(ch.g)[:n].copy(),
        "k": ch.k,
        "logp": ch.logp,
        "rec_steps": rec_steps,
        "rec_logp": rec_logp,
        "rec_g": rec_g,
        "rec_k": rec_k,
        "visits": visits,
        "proposals": proposals,
        "accepts": accepts,
        "max_drift": max_drift,
    }


cdef class GreedyColumns:
    """Compiled twin of the sorted-key merge columns; see the reference."""

    cdef vector[vector[long]] keys
    cdef vector[vector[long]] vals
    cdef double[::1] lgf
    cdef object _lgf_ref

    def __init__(self, samples, lgf):
        samples = np.ascontiguousarray(samples, dtype=np.int64)
        if samples.ndim != 2:
            raise ValueError("samples must be a 2-d array of labels")
        cdef long[:, ::1] sm = samples
        cdef long ns = sm.shape[0]
        cdef long n = sm.shape[1]
        if np.asarray(samples).max(initial=0) >= (1 << 20):
            raise ValueError("community labels too large for key packing")
        lgf_arr = np.ascontiguousarray(lgf, dtype=np.float64)
        self._lgf_ref = lgf_arr
        self.lgf = lgf_arr
        self.keys.resize(n)
        self.vals.resize(n)
        cdef long h, r
        for h in range(n):
            self.keys[h].resize(ns)
            self.vals[h].resize(ns)
            for r in range(ns):
                self.keys[h][r] = (r << 20) | sm[r, h]
                self.vals[h][r] = 1

    def ncols(self):
        return self.keys.size()

    def pairsum(self, long i, long j):
        cdef vector[long] *ka = &self.keys[i]
        cdef vector[long] *va = &self.vals[i]
        cdef vector[long] *kb = &self.keys[j]
        cdef vector[long] *vb = &self.vals[j]
        cdef size_t pa = 0, pb = 0, la = ka.size(), lb = kb.size()
        cdef double acc = 0.0
        cdef long cva, cvb
        while pa < la and pb < lb:
            if deref(ka)[pa] < deref(kb)[pb]:
                pa += 1
            elif deref(ka)[pa] > deref(kb)[pb]:
                pb += 1
            else:
                cva = deref(va)[pa]
                cvb = deref(vb)[pb]
                acc += self.lgf[cva + cvb] - self.lgf[cva] - self.lgf[cvb]
                pa += 1
                pb += 1
        return acc

    def merge(self, long i, long j):
        if not (0 <= i < j < <long>self.keys.size()):
            raise ValueError("need i < j < ncols")
        cdef vector[long] mk, mv
        cdef vector[long] *ka = &self.keys[i]
        cdef vector[long] *va = &self.vals[i]
        cdef vector[long] *kb = &self.keys[j]
        cdef vector[long] *vb = &self.vals[j]
        cdef size_t pa = 0, pb = 0, la = ka.size(), lb = kb.size()
        mk.reserve(la + lb)
        mv.reserve(la + lb)
        while pa < la or pb < lb:
            if pb == lb or (pa < la and deref(ka)[pa] < deref(kb)[pb]):
                mk.push_back(deref(ka)[pa]); mv.push_back(deref(va)[pa]); pa += 1
            elif pa == la or deref(kb)[pb] < deref(ka)[pa]:
                mk.push_back(deref(kb)[pb]); mv.push_back(deref(vb)[pb]); pb += 1
            else:
                mk.push_back(deref(ka)[pa])
                mv.push_back(deref(va)[pa] + deref(vb)[pb])
                pa += 1; pb += 1
        self.keys[i] = mk
        self.vals[i] = mv
        self.keys.erase(self.keys.begin() + j)
        self.vals.erase(self.vals.begin() + j)
