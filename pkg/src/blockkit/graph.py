"""Undirected multigraph with integer edge multiplicities.

Self-loops are stored on the diagonal of the adjacency with weight two per
loop, so that the degree identity d_i = sum_j A_ij holds uniformly and
sum_i d_i = 2m.  Node identifiers from input files are arbitrary tokens;
they are mapped to dense integer ids in first-appearance order and the
original labels are kept for output.
"""

from __future__ import annotations

import hashlib
import io
import re

import numpy as np


class GraphParseError(ValueError):
    """Raised for malformed or empty network files."""


class Graph:
    """Undirected multigraph on nodes 0..n-1.

    ``adj`` maps an ordered pair (i, j) with i <= j to the adjacency entry
    A_ij; the diagonal entry A_ii is twice the number of self-loops at i.
    Absent pairs mean A_ij = 0.
    """

    def __init__(self, n, adj, labels=None):
        if n < 1:
            raise ValueError("graph must have at least one node")
        self.n = int(n)
        self.adj = dict(adj)
        self.labels = list(labels) if labels is not None else [str(i) for i in range(n)]
        if len(self.labels) != self.n:
            raise ValueError("label count does not match node count")
        deg = np.zeros(self.n, dtype=np.int64)
        total = 0
        for (i, j), w in self.adj.items():
            if not (0 <= i <= j < self.n):
                raise ValueError(f"edge ({i},{j}) out of range for n={self.n}")
            if w < 1:
                raise ValueError(f"multiplicity for ({i},{j}) must be >= 1")
            if i == j:
                if w % 2:
                    raise ValueError(f"diagonal entry A[{i},{i}] must be even")
                deg[i] += w
                total += w
            else:
                deg[i] += w
                deg[j] += w
                total += 2 * w
        self.degrees = deg
        self.m = total // 2
        self._csr = None
        self._ea = None

    @classmethod
    def from_edges(cls, n, edges, labels=None):
        """Build from an iterable of (i, j) endpoint pairs.

        Repeated pairs stack into multi-edges; (i, i) adds one self-loop.
        """
        adj = {}
        for i, j in edges:
            i, j = int(i), int(j)
            key = (i, j) if i <= j else (j, i)
            adj[key] = adj.get(key, 0) + (2 if i == j else 1)
        return cls(n, adj, labels)

    def density(self):
        """Edge density 2m/n^2, the default for the rate hyperparameter."""
        return 2.0 * self.m / (self.n * self.n)

    def neighbor_arrays(self):
        """CSR-style arrays (indptr, indices, mults, loops) for fast kernels.

        Off-diagonal entries appear in both directions; ``loops[i]`` is the
        number of self-loops at i (A_ii / 2).
        """
        if self._csr is None:
            n = self.n
            loops = np.zeros(n, dtype=np.int64)
            counts = np.zeros(n, dtype=np.int64)
            for (i, j), w in self.adj.items():
                if i == j:
                    loops[i] = w // 2
                else:
                    counts[i] += 1
                    counts[j] += 1
            indptr = np.zeros(n + 1, dtype=np.int64)
            np.cumsum(counts, out=indptr[1:])
            indices = np.zeros(indptr[-1], dtype=np.int64)
            mults = np.zeros(indptr[-1], dtype=np.int64)
            fill = indptr[:-1].copy()
            for (i, j), w in sorted(self.adj.items()):
                if i == j:
                    continue
                indices[fill[i]] = j
                mults[fill[i]] = w
                fill[i] += 1
                indices[fill[j]] = i
                mults[fill[j]] = w
                fill[j] += 1
            self._csr = (indptr, indices, mults, loops)
        return self._csr

    def edge_arrays(self):
        """Unique unordered edges as arrays (u, v, w); diagonal w is A_ii."""
        if self._ea is None:
            items = sorted(self.adj.items())
            u = np.array([ij[0] for ij, _ in items], dtype=np.int64)
            v = np.array([ij[1] for ij, _ in items], dtype=np.int64)
            w = np.array([wt for _, wt in items], dtype=np.int64)
            self._ea = (u, v, w)
        return self._ea

    def fingerprint(self):
        """Content hash binding sample files to the graph they came from."""
        h = hashlib.sha256()
        h.update(f"{self.n} {self.m}\n".encode())
        for (i, j), w in sorted(self.adj.items()):
            h.update(f"{i} {j} {w}\n".encode())
        return h.hexdigest()[:16]

    def same_structure(self, other):
        """Label-keyed equality: same nodes, multiplicities, and degrees."""
        if self.n != other.n or self.m != other.m:
            return False
        if sorted(self.labels) != sorted(other.labels):
            return False
        mine = {(self.labels[i], self.labels[j]): w for (i, j), w in self.adj.items()}
        mine = {(min(a, b), max(a, b)): w for (a, b), w in mine.items()}
        theirs = {(other.labels[i], other.labels[j]): w for (i, j), w in other.adj.items()}
        theirs = {(min(a, b), max(a, b)): w for (a, b), w in theirs.items()}
        return mine == theirs


def load_edge_list(stream):
    """Read a graph from a stream of "u v" lines.

    Tokens are arbitrary identifiers, mapped to ids 0..n-1 in order of first
    appearance.  Repeated lines increase multiplicity; a "u u" line adds one
    self-loop (A_uu += 2).  Lines starting with '#' and blank lines are
    skipped.  Raises GraphParseError on malformed lines or empty input.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    ids = {}
    labels = []
    adj = {}

    def node_id(tok):
        if tok not in ids:
            ids[tok] = len(labels)
            labels.append(tok)
        return ids[tok]

    for lineno, line in enumerate(stream, start=1):
        if line.startswith("#"):
            continue
        toks = line.split()
        if not toks:
            continue
        if len(toks) != 2:
            raise GraphParseError(f"line {lineno}: expected 2 tokens, got {len(toks)}")
        i = node_id(toks[0])
        j = node_id(toks[1])
        if i == j:
            adj[(i, i)] = adj.get((i, i), 0) + 2
        else:
            key = (min(i, j), max(i, j))
            adj[key] = adj.get(key, 0) + 1
    if not labels:
        raise GraphParseError("empty edge list")
    return Graph(len(labels), adj, labels)


def write_edge_list(graph, stream):
    """Write the edge-list form (ASCII, '\\n' endings, one line per edge).

    Each unordered pair is emitted once per unit of multiplicity; each
    self-loop once.  Nodes with degree zero cannot be represented in this
    format and are dropped on re-read.
    """
    for (i, j), w in sorted(graph.adj.items()):
        count = w // 2 if i == j else w
        for _ in range(count):
            stream.write(f"{graph.labels[i]} {graph.labels[j]}\n")


_GML_TOKEN = re.compile(r"\[|\]|[^\s\[\]]+")


def load_gml(stream):
    """Minimal GML subset reader.

    Only ``node [ id N ]`` and ``edge [ source A target B ]`` records are
    interpreted; every other key (labels, weights, graphics, ...) is
    ignored.  Node ids keep their textual form as labels.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    toks = _GML_TOKEN.findall(stream.read())
    ids = {}
    labels = []
    adj = {}

    def node_id(tok):
        if tok not in ids:
            ids[tok] = len(labels)
            labels.append(tok)
        return ids[tok]

    pos = 0
    nt = len(toks)

    def parse_block(start):
        # returns (dict of scalar keys, end position); nested blocks skipped
        fields = {}
        depth = 1
        p = start
        key = None
        while p < nt and depth > 0:
            t = toks[p]
            if t == "[":
                depth += 1
                key = None
            elif t == "]":
                depth -= 1
                key = None
            elif depth == 1:
                if key is None:
                    key = t
                else:
                    fields.setdefault(key, t)
                    key = None
            p += 1
        return fields, p

    while pos < nt:
        t = toks[pos]
        if t in ("node", "edge") and pos + 1 < nt and toks[pos + 1] == "[":
            fields, end = parse_block(pos + 2)
            if t == "node":
                if "id" in fields:
                    node_id(fields["id"])
            else:
                if "source" in fields and "target" in fields:
                    i = node_id(fields["source"])
                    j = node_id(fields["target"])
                    if i == j:
                        adj[(i, i)] = adj.get((i, i), 0) + 2
                    else:
                        key = (min(i, j), max(i, j))
                        adj[key] = adj.get(key, 0) + 1
            pos = end
        else:
            pos += 1
    if not labels:
        raise GraphParseError("no node or edge records found")
    return Graph(len(labels), adj, labels)
