"""Similarity of two divisions by reduced mutual information.

Plain mutual information overcounts: knowing the contingency table of
two divisions is worth less than the table suggests, because many label
matrices share the same margins.  The reduction subtracts the log count
of contingency tables with the observed margins,

    M = (1/n) [ log n! + sum_gh log c_gh!
                - sum_g log a_g! - sum_h log b_h! ]  -  (1/n) log Omega(a, b)

where Omega(a, b) is the number of nonnegative integer matrices with row
sums a and column sums b.  M is symmetric, at most the reduced entropy
of either division, and identically zero when either division is trivial
(one group, or all singletons).

Omega is counted exactly by dynamic programming for small n and
estimated for large n by the classic margin-product formula

    Omega(a, b) ~= prod_g C(a_g+q-1, q-1) prod_h C(b_h+k-1, k-1)
                   / C(n+kq-1, kq-1)

which is exact whenever either division is trivial.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

#: Largest n the exact Omega counter accepts by default.
EXACT_LIMIT = 40


def contingency(g1, g2):
    """Joint counts of two label vectors: (c matrix, row sums, col sums).

    Empty labels are dropped, so the margins are strictly positive and
    c has shape (groups of g1) x (groups of g2).
    """
    g1 = np.asarray(g1, dtype=np.int64)
    g2 = np.asarray(g2, dtype=np.int64)
    if g1.shape != g2.shape or g1.ndim != 1 or g1.size == 0:
        raise ValueError("need two equal-length 1-d label vectors")
    if g1.min() < 0 or g2.min() < 0:
        raise ValueError("labels must be nonnegative")
    _, i1 = np.unique(g1, return_inverse=True)
    _, i2 = np.unique(g2, return_inverse=True)
    k = int(i1.max()) + 1
    q = int(i2.max()) + 1
    c = np.bincount(i1 * q + i2, minlength=k * q).reshape(k, q)
    return c, c.sum(axis=1), c.sum(axis=0)


def _multinomial(parts):
    out = math.factorial(sum(parts))
    for x in parts:
        out //= math.factorial(x)
    return out


def omega_exact(a, b, limit=EXACT_LIMIT):
    """Exact number of tables with margins (a, b), as a Python integer.

    Rows are placed one at a time; residual column sums are kept as a
    sorted tuple so permutation-equivalent states share one memo entry,
    and columns with equal residuals are filled as a group with a
    multinomial count of arrangements.  ``limit`` bounds the table total
    to keep the state space in check.
    """
    a = [int(x) for x in a if x > 0]
    b = [int(x) for x in b if x > 0]
    n = sum(a)
    if n != sum(b):
        raise ValueError("margins must have equal totals")
    if n == 0:
        return 1
    if n > limit:
        raise ValueError(
            f"exact count limited to n <= {limit} (got {n}); use the approximation"
        )
    if len(a) == 1 or len(b) == 1:
        return 1
    if all(x == 1 for x in b):
        return _multinomial(a)
    if all(x == 1 for x in a):
        return _multinomial(b)
    rows = tuple(sorted(a, reverse=True))

    def placements(groups, amount):
        """Yield (ways, residual groups) for one row of given amount.

        ``groups`` is a tuple of (value, count) with distinct values;
        within a group the count columns are interchangeable, so choosing
        how many give j units each contributes a multinomial factor.
        All the intermediate divisions are exact.
        """
        def rec(gi, remaining, ways, res):
            if gi == len(groups):
                if remaining == 0:
                    yield ways, res
                return
            v, c = groups[gi]

            def split(j, cols_left, rem, w, acc):
                if j == 0:
                    nacc = acc + (((v, cols_left),) if cols_left > 0 else ())
                    yield from rec(gi + 1, rem, w // math.factorial(cols_left), nacc)
                    return
                for dj in range(min(cols_left, rem // j) + 1):
                    nv = v - j
                    nacc = acc + (((nv, dj),) if nv > 0 and dj > 0 else ())
                    yield from split(j - 1, cols_left - dj, rem - j * dj,
                                     w // math.factorial(dj), nacc)

            yield from split(v, c, remaining, ways * math.factorial(c), res)

        yield from rec(0, amount, 1, ())

    @lru_cache(maxsize=None)
    def count(idx, residuals):
        if idx == len(rows):
            return 1
        groups = residuals
        total = 0
        for ways, res in placements(groups, rows[idx]):
            merged = {}
            for v, c in res:
                merged[v] = merged.get(v, 0) + c
            key = tuple(sorted(merged.items(), reverse=True))
            total += ways * count(idx + 1, key)
        return total

    start = {}
    for x in b:
        start[x] = start.get(x, 0) + 1
    result = count(0, tuple(sorted(start.items(), reverse=True)))
    count.cache_clear()
    return result


def _lgf(x):
    return float(gammaln(x + 1.0))


def _lgf_sum(arr):
    return float(gammaln(np.asarray(arr, dtype=np.float64) + 1.0).sum())


def _log_binom(top, bottom):
    return _lgf(top) - _lgf(bottom) - _lgf(top - bottom)


def log_omega_exact(a, b, limit=EXACT_LIMIT):
    """log of the exact table count, with closed forms for the edges.

    The closed forms are evaluated with the same log-factorial helpers
    the mutual information numerator uses, so trivial divisions cancel
    term by term rather than merely to rounding error.
    """
    a = np.asarray([x for x in np.asarray(a).ravel() if x > 0], dtype=np.int64)
    b = np.asarray([x for x in np.asarray(b).ravel() if x > 0], dtype=np.int64)
    n = int(a.sum())
    if n != int(b.sum()):
        raise ValueError("margins must have equal totals")
    if len(a) == 1 or len(b) == 1:
        return 0.0
    if (b == 1).all():
        return _lgf(n) - _lgf_sum(a)
    if (a == 1).all():
        return _lgf(n) - _lgf_sum(b)
    return math.log(omega_exact(a, b, limit=limit))


def log_omega_approx(a, b):
    """Margin-product estimate of log Omega."""
    a = np.asarray([x for x in np.asarray(a).ravel() if x > 0], dtype=np.float64)
    b = np.asarray([x for x in np.asarray(b).ravel() if x > 0], dtype=np.float64)
    n = a.sum()
    if n != b.sum():
        raise ValueError("margins must have equal totals")
    k = a.size
    q = b.size
    rows = float((gammaln(a + q) - gammaln(a + 1.0) - _lgf(q - 1)).sum())
    cols = float((gammaln(b + k) - gammaln(b + 1.0) - _lgf(k - 1)).sum())
    return rows + cols - _log_binom(n + k * q - 1, k * q - 1)


def log_omega(a, b, mode="auto", limit=EXACT_LIMIT):
    """Dispatch between the exact count and the estimate.

    mode "auto" goes exact when the total is within ``limit``.
    """
    if mode == "exact":
        return log_omega_exact(a, b, limit=limit)
    if mode == "approx":
        return log_omega_approx(a, b)
    if mode != "auto":
        raise ValueError(f"unknown mode {mode!r}")
    n = int(np.asarray(a).sum())
    if n <= limit:
        return log_omega_exact(a, b, limit=limit)
    return log_omega_approx(a, b)


def table_rmi(c, mode="auto", limit=EXACT_LIMIT):
    """Reduced mutual information per node from a count table.

    Zero rows and columns of c are dropped before the margins are taken.
    """
    c = np.asarray(c, dtype=np.int64)
    if c.ndim != 2 or (c < 0).any():
        raise ValueError("need a 2-d table of nonnegative counts")
    c = c[c.sum(axis=1) > 0][:, c.sum(axis=0) > 0]
    if c.size == 0:
        raise ValueError("table is empty")
    a = c.sum(axis=1)
    b = c.sum(axis=0)
    n = int(a.sum())
    base = _lgf(n) + _lgf_sum(c.ravel()) - _lgf_sum(a) - _lgf_sum(b)
    return (base - log_omega(a, b, mode=mode, limit=limit)) / n


def reduced_mutual_information(g1, g2, mode="auto", limit=EXACT_LIMIT):
    """Reduced mutual information per node between two label vectors."""
    c, a, b = contingency(g1, g2)
    n = int(a.sum())
    base = _lgf(n) + _lgf_sum(c.ravel()) - _lgf_sum(a) - _lgf_sum(b)
    return (base - log_omega(a, b, mode=mode, limit=limit)) / n


def mean_rmi(samples, reference, mode="auto", limit=EXACT_LIMIT, max_samples=None):
    """Average reduced mutual information of a reference against samples.

    ``samples`` is an (S, n) array of label vectors.  ``max_samples``
    thins deterministically with an even stride, so repeated calls see
    the same subset.
    """
    samples = np.asarray(samples)
    if samples.ndim != 2:
        raise ValueError("samples must be a 2-d array of label vectors")
    if samples.shape[0] == 0:
        raise ValueError("need at least one sample")
    if max_samples is not None and samples.shape[0] > max_samples:
        stride = -(-samples.shape[0] // int(max_samples))
        samples = samples[::stride]
    vals = [reduced_mutual_information(s, reference, mode=mode, limit=limit)
            for s in samples]
    return float(np.mean(vals))
