"""Pairwise co-assignment summaries of a sample ensemble.

The comembership matrix holds, for every node pair, the fraction of
sampled divisions placing the two nodes in the same community.  The
helpers here histogram those fractions by pair class, compute the meet
of several divisions, and write the CSV the command line emits.
"""

from __future__ import annotations

import numpy as np

from .partition import Partition


def comembership_counts(samples):
    """Integer pair counts: entry (i, j) = samples placing i with j."""
    samples = np.asarray(samples)
    if samples.ndim != 2 or samples.shape[0] == 0:
        raise ValueError("samples must be a nonempty (records, n) array")
    n = samples.shape[1]
    counts = np.zeros((n, n), dtype=np.int64)
    for row in samples:
        counts += row[:, None] == row[None, :]
    return counts


def comembership_matrix(samples):
    """Fraction-of-samples version of the pair counts; diagonal is 1."""
    samples = np.asarray(samples)
    return comembership_counts(samples) / samples.shape[0]


def bin_index(values, bins):
    """Right-closed uniform bins of [0, 1]: (0, 1/bins], (1/bins, 2/bins], ...

    Zeros land in the first bin.
    """
    idx = np.ceil(np.asarray(values, dtype=np.float64) * bins).astype(np.int64) - 1
    return np.clip(idx, 0, bins - 1)


def stratified_histogram(matrix, pair_class, bins=50):
    """Normalized histograms of off-diagonal entries, split by pair class.

    ``pair_class`` maps an unordered node pair to a class label, either
    as a callable (i, j) -> label or a dict keyed by (i, j) with i < j;
    every pair must be covered.  Returns {label: {"bin_edges": ...,
    "masses": ...}} with per-class masses summing to one.
    """
    matrix = np.asarray(matrix)
    n = matrix.shape[0]
    if matrix.shape != (n, n):
        raise ValueError("matrix must be square")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    lookup = pair_class.get if isinstance(pair_class, dict) else None
    values = {}
    for i in range(n - 1):
        for j in range(i + 1, n):
            if lookup is not None:
                label = lookup((i, j))
            else:
                label = pair_class(i, j)
            if label is None:
                raise ValueError(f"pair ({i},{j}) has no class label")
            values.setdefault(label, []).append(matrix[i, j])
    edges = np.arange(bins + 1) / bins
    out = {}
    for label, vals in values.items():
        counts = np.bincount(bin_index(vals, bins), minlength=bins)
        out[label] = {"bin_edges": edges.copy(), "masses": counts / len(vals)}
    return out


def ring_distance_classes(cliques, size, clique_of=None):
    """Pair classifier for the ring-of-cliques layout: ring distance.

    Labels a pair by the ring distance between its two cliques: 0 for
    same clique, up to cliques // 2.  By default assumes the generator's
    node order (clique i holds nodes i*size .. (i+1)*size - 1); pass
    clique_of to supply the clique index per node instead, for graphs
    whose nodes were renumbered on the way through a file.
    """
    if cliques < 1 or size < 1:
        raise ValueError("need positive clique count and size")
    if clique_of is not None:
        clique_of = np.asarray(clique_of, dtype=np.int64)

    def classify(i, j):
        if clique_of is None:
            ci, cj = i // size, j // size
        else:
            ci, cj = int(clique_of[i]), int(clique_of[j])
        if not (0 <= ci < cliques and 0 <= cj < cliques):
            raise ValueError(f"pair ({i},{j}) outside the ring layout")
        d = abs(ci - cj)
        return min(d, cliques - d)

    return classify


def membership_classes(labels):
    """Pair classifier from a reference division: within or between."""
    labels = np.asarray(labels)

    def classify(i, j):
        return "within" if labels[i] == labels[j] else "between"

    return classify


def meet_partition(divisions):
    """Common refinement of several divisions of the same nodes.

    Two nodes share a meet group exactly when every division puts them
    together.  Groups are numbered in first-appearance order.
    """
    rows = [np.asarray(d.g if isinstance(d, Partition) else d) for d in divisions]
    if not rows:
        raise ValueError("need at least one division")
    n = rows[0].size
    for r in rows:
        if r.ndim != 1 or r.size != n:
            raise ValueError("divisions must cover the same node set")
    arr = np.vstack(rows)
    mapping = {}
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        key = tuple(int(x) for x in arr[:, i])
        if key not in mapping:
            mapping[key] = len(mapping)
        out[i] = mapping[key]
    return Partition(out)


def write_matrix_csv(matrix, labels, stream):
    """Comembership matrix with node labels on both axes, 6 decimals."""
    matrix = np.asarray(matrix)
    n = matrix.shape[0]
    if len(labels) != n:
        raise ValueError("label count does not match matrix size")
    stream.write("," + ",".join(str(x) for x in labels) + "\n")
    for i in range(n):
        row = ",".join(f"{matrix[i, j]:.6f}" for j in range(n))
        stream.write(f"{labels[i]},{row}\n")
