"""Front end for posterior sampling: multi-chain driver and ensembles.

A run produces a SampleEnsemble: thinned divisions with their log
posterior, tagged by chain and step, plus acceptance counters and an
optional exhaustive visit tally for tiny graphs.  Ensembles round-trip
through a plain text format headed by the graph fingerprint, so a file
can be matched later against the graph it came from.
"""

from __future__ import annotations

import io
import math
import os

import numpy as np
from scipy.special import gammaln

from ._backend import run_chain
from .partition import Partition

_HEADER = "#blockkit-trace"


def acceptance_log_ratio(delta, k_before, k_after):
    """Log acceptance ratio of one proposed move.

    On top of the posterior change this carries two corrections: the
    proposal menu has k+1 entries, which differs between the two ends of
    the move when a community is born or dies, and a division with k
    communities stands for k! interchangeable labelings, so matching
    enumeration over divisions weights each by k!.
    """
    if k_before == k_after:
        return delta
    return (delta + math.log(k_before + 1.0) - math.log(k_after + 1.0)
            + float(gammaln(k_after + 1.0)) - float(gammaln(k_before + 1.0)))


class SamplerConfig:
    """Bundle of sampling knobs with validation.

    burn_in defaults to a tenth of the steps; thin to a value giving at
    most ~10000 records per chain.
    """

    def __init__(self, steps=100_000, burn_in=None, thin=None, chains=1,
                 seed=0, p=None, tally=False, resync_every=1_000_000):
        self.steps = int(steps)
        self.burn_in = self.steps // 10 if burn_in is None else int(burn_in)
        if thin is None:
            thin = max(1, (self.steps - self.burn_in) // 10_000)
        self.thin = int(thin)
        self.chains = int(chains)
        self.seed = int(seed)
        self.p = p
        self.tally = bool(tally)
        self.resync_every = int(resync_every)
        if self.steps < 1 or self.burn_in < 0 or self.thin < 1 or self.chains < 1:
            raise ValueError("need steps >= 1, burn_in >= 0, thin, chains >= 1")
        if self.burn_in >= self.steps:
            raise ValueError("burn_in must be smaller than steps")


def sample(graph, config=None, **kwargs):
    """Run MH chains on a graph and collect the thinned ensemble.

    Chain c draws from its own PCG64 stream seeded with seed + c, so a
    run is reproducible and chains are independent.  Keyword arguments
    are SamplerConfig fields.
    """
    cfg = config if config is not None else SamplerConfig(**kwargs)
    chains = []
    visits = None
    proposals = 0
    accepts = 0
    max_drift = 0.0
    for c in range(cfg.chains):
        out = run_chain(
            graph,
            g0=None,
            p=cfg.p,
            steps=cfg.steps,
            seed=cfg.seed + c,
            burn_in=cfg.burn_in,
            thin=cfg.thin,
            tally=cfg.tally,
            resync_every=cfg.resync_every,
        )
        chains.append(out)
        proposals += out["proposals"]
        accepts += out["accepts"]
        max_drift = max(max_drift, out["max_drift"])
        if out["visits"] is not None:
            if visits is None:
                visits = {}
            for code, cnt in out["visits"].items():
                visits[code] = visits.get(code, 0) + cnt
    nrec = sum(o["rec_g"].shape[0] for o in chains)
    chain_id = np.zeros(nrec, dtype=np.int32)
    step = np.zeros(nrec, dtype=np.int64)
    logp = np.zeros(nrec, dtype=np.float64)
    kvals = np.zeros(nrec, dtype=np.int32)
    g = np.zeros((nrec, graph.n), dtype=np.int32)
    at = 0
    for c, out in enumerate(chains):
        cn = out["rec_g"].shape[0]
        chain_id[at:at + cn] = c
        step[at:at + cn] = out["rec_steps"]
        logp[at:at + cn] = out["rec_logp"]
        kvals[at:at + cn] = out["rec_k"]
        g[at:at + cn] = out["rec_g"]
        at += cn
    return SampleEnsemble(
        n=graph.n, m=graph.m, fingerprint=graph.fingerprint(),
        chain=chain_id, step=step, logp=logp, k=kvals, g=g,
        visits=visits, proposals=proposals, accepts=accepts,
        max_drift=max_drift, config=cfg,
    )


class SampleEnsemble:
    """Thinned divisions from one or more chains over a single graph."""

    def __init__(self, n, m, fingerprint, chain, step, logp, k, g,
                 visits=None, proposals=0, accepts=0, max_drift=0.0,
                 config=None):
        self.n = int(n)
        self.m = int(m)
        self.fingerprint = fingerprint
        self.chain = np.asarray(chain, dtype=np.int32)
        self.step = np.asarray(step, dtype=np.int64)
        self.logp = np.asarray(logp, dtype=np.float64)
        self.k = np.asarray(k, dtype=np.int32)
        self.g = np.asarray(g, dtype=np.int32)
        if self.g.ndim != 2 or self.g.shape[1] != self.n:
            raise ValueError("division array must be (records, n)")
        self.visits = visits
        self.proposals = int(proposals)
        self.accepts = int(accepts)
        self.max_drift = float(max_drift)
        self.config = config

    def __len__(self):
        return self.g.shape[0]

    def matches(self, graph):
        """True when this ensemble was sampled from ``graph``."""
        return graph.fingerprint() == self.fingerprint

    def acceptance_rate(self):
        return self.accepts / self.proposals if self.proposals else 0.0

    def canonical_forms(self):
        """Each record's division relabeled in first-appearance order."""
        out = np.empty_like(self.g)
        for idx in range(self.g.shape[0]):
            row = self.g[idx]
            mapping = {}
            for col in range(row.size):
                lab = int(row[col])
                if lab not in mapping:
                    mapping[lab] = len(mapping)
                out[idx, col] = mapping[lab]
        return out

    def best_of(self, top=1):
        """Highest-posterior distinct divisions, best first.

        Returns a list of (log posterior, Partition); duplicates of one
        division keep their highest recorded value.
        """
        forms = self.canonical_forms()
        best = {}
        for idx in range(forms.shape[0]):
            key = forms[idx].tobytes()
            lp = float(self.logp[idx])
            if key not in best or lp > best[key][0]:
                best[key] = (lp, idx)
        ranked = sorted(best.values(), key=lambda t: -t[0])[: int(top)]
        return [(lp, Partition(forms[idx])) for lp, idx in ranked]

    # -- persistence -----------------------------------------------------

    def save(self, path_or_stream):
        """Write the ensemble as one header line plus one line per record.

        Line layout: chain step logp k g_0 ... g_{n-1}.
        """
        own = isinstance(path_or_stream, (str, bytes, os.PathLike))
        fh = open(path_or_stream, "w") if own else path_or_stream
        try:
            fh.write(f"{_HEADER} n={self.n} m={self.m} hash={self.fingerprint}\n")
            for idx in range(len(self)):
                labels = " ".join(str(int(x)) for x in self.g[idx])
                fh.write(f"{self.chain[idx]} {self.step[idx]} "
                         f"{float(self.logp[idx])!r} {self.k[idx]} {labels}\n")
        finally:
            if own:
                fh.close()

    @classmethod
    def load(cls, path_or_stream, graph=None):
        """Read an ensemble back; verify the graph binding when given."""
        own = isinstance(path_or_stream, (str, bytes, os.PathLike))
        fh = open(path_or_stream) if own else path_or_stream
        try:
            header = fh.readline().strip()
            if not header.startswith(_HEADER):
                raise ValueError("not a sample trace: bad header")
            fields = dict(tok.split("=", 1) for tok in header.split()[1:])
            n = int(fields["n"])
            m = int(fields["m"])
            fp = fields["hash"]
            chain, step, logp, kv, rows = [], [], [], [], []
            for lineno, line in enumerate(fh, start=2):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                toks = line.split()
                if len(toks) != 4 + n:
                    raise ValueError(f"line {lineno}: expected {4 + n} fields, got {len(toks)}")
                chain.append(int(toks[0]))
                step.append(int(toks[1]))
                logp.append(float(toks[2]))
                kv.append(int(toks[3]))
                rows.append([int(x) for x in toks[4:]])
            ens = cls(
                n=n, m=m, fingerprint=fp,
                chain=np.array(chain, dtype=np.int32),
                step=np.array(step, dtype=np.int64),
                logp=np.array(logp, dtype=np.float64),
                k=np.array(kv, dtype=np.int32),
                g=np.array(rows, dtype=np.int32).reshape(len(rows), n),
            )
        finally:
            if own:
                fh.close()
        if graph is not None and not ens.matches(graph):
            raise ValueError(
                f"trace was sampled from a different graph "
                f"(trace hash {fp}, graph hash {graph.fingerprint()})"
            )
        return ens

    def to_string(self):
        buf = io.StringIO()
        self.save(buf)
        return buf.getvalue()
