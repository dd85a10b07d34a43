"""Command-line pipeline: generate, sample, analyze, blocks.

Outputs are plain CSV/JSON/text files meant for external plotting; the
graph content hash is stamped into sample traces so later stages can
refuse mismatched inputs.  A flat key=value config file can hold any
long-form option; explicit flags win over the file.

Exit codes: 0 on success, 1 on runtime or data errors, 2 on usage
errors (argparse's convention).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from .blocks import describe_division, greedy_blocks
from .comembership import (
    comembership_matrix,
    meet_partition,
    membership_classes,
    ring_distance_classes,
    stratified_histogram,
    write_matrix_csv,
)
from .generators import DcsbmParams, dcsbm_generate, ring_of_cliques
from .graph import GraphParseError, load_edge_list, load_gml, write_edge_list
from .sampler import SampleEnsemble, SamplerConfig, sample


def load_config(path):
    """Flat key=value lines; blank lines and # comments skipped."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, val = line.split("=", 1)
            out[key.strip()] = val.strip()
    return out


class Options:
    """Flag > config file > default, with config values cast per use."""

    def __init__(self, args):
        self.args = args
        self.cfg = load_config(args.config) if getattr(args, "config", None) else {}

    def get(self, name, default, cast=str):
        val = getattr(self.args, name, None)
        if val is not None:
            return val
        if name in self.cfg:
            raw = self.cfg[name]
            if cast is bool:
                return raw.lower() in ("1", "true", "yes", "on")
            return cast(raw)
        return default


def read_graph(path):
    if path.endswith(".gml"):
        with open(path) as fh:
            return load_gml(fh)
    with open(path) as fh:
        return load_edge_list(fh)


def write_labels(path, node_names, assignment):
    """One 'node group' line per node, nodes named as in the graph."""
    with open(path, "w") as fh:
        for name, lab in zip(node_names, assignment):
            fh.write(f"{name} {int(lab)}\n")


def read_labels(path, graph):
    """Read a 'node group' file back, matching nodes by graph label."""
    index = {str(name): i for i, name in enumerate(graph.labels)}
    labels = np.full(graph.n, -1, dtype=np.int64)
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            toks = line.split()
            if len(toks) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'node label'")
            idx = index.get(toks[0])
            if idx is None:
                raise ValueError(f"{path}:{lineno}: unknown node {toks[0]!r}")
            labels[idx] = int(toks[1])
    if (labels < 0).any():
        missing = graph.labels[int(np.nonzero(labels < 0)[0][0])]
        raise ValueError(f"{path}: no label for node {missing!r}")
    return labels


def outdir(opts):
    path = opts.get("out", ".")
    os.makedirs(path, exist_ok=True)
    return path


# -- generate ------------------------------------------------------------


def cmd_generate(args):
    opts = Options(args)
    out = outdir(opts)
    seed = opts.get("seed", 0, int)
    if args.model == "ring-of-cliques":
        cliques = opts.get("cliques", None, int)
        size = opts.get("size", None, int)
        if cliques is None or size is None:
            print("error: ring-of-cliques needs --cliques and --size", file=sys.stderr)
            return 2
        graph, truth = ring_of_cliques(cliques, size, ports=opts.get("ports", "fixed"),
                                       seed=seed)
        labels = truth.g
    else:
        spec_path = opts.get("spec", None)
        if spec_path is None:
            print("error: dcsbm needs --spec pointing to a JSON parameter file",
                  file=sys.stderr)
            return 2
        with open(spec_path) as fh:
            spec = json.load(fh)
        if "g" in spec:
            g = np.asarray(spec["g"], dtype=np.int64)
        elif "sizes" in spec:
            g = np.repeat(np.arange(len(spec["sizes"])), spec["sizes"])
        else:
            raise ValueError("dcsbm spec needs 'g' or 'sizes'")
        if args.seed is None and "seed" not in opts.cfg and "seed" in spec:
            seed = int(spec["seed"])
        params = DcsbmParams(
            g, np.asarray(spec["omega"], dtype=float),
            theta=spec.get("theta"), seed=seed,
        )
        graph = dcsbm_generate(params)
        labels = params.g
    edge_path = os.path.join(out, "edges.txt")
    with open(edge_path, "w") as fh:
        write_edge_list(graph, fh)
    write_labels(os.path.join(out, "truth.txt"), graph.labels, labels)
    # report the hash of the file as later stages will read it; the
    # edge-list format renumbers nodes by first appearance
    reloaded = read_graph(edge_path)
    print(f"wrote {edge_path}: n={graph.n} m={graph.m} hash={reloaded.fingerprint()}")
    return 0


# -- sample --------------------------------------------------------------


def cmd_sample(args):
    opts = Options(args)
    out = outdir(opts)
    graph = read_graph(args.input)
    cfg = SamplerConfig(
        steps=opts.get("steps", 1_000_000, int),
        burn_in=opts.get("burn_in", None, int),
        thin=opts.get("thin", None, int),
        chains=opts.get("chains", 1, int),
        seed=opts.get("seed", 0, int),
        p=opts.get("p", None, float),
    )
    t0 = time.perf_counter()
    ens = sample(graph, cfg)
    elapsed = time.perf_counter() - t0
    trace_path = os.path.join(out, "samples.trace")
    ens.save(trace_path)
    with open(os.path.join(out, "logp.csv"), "w") as fh:
        fh.write("chain,step,logp\n")
        for i in range(len(ens)):
            fh.write(f"{ens.chain[i]},{ens.step[i]},{float(ens.logp[i])!r}\n")
    total = cfg.steps * cfg.chains
    print(f"wrote {trace_path}: {len(ens)} records from {cfg.chains} chain(s)")
    print(f"steps/sec: {total / elapsed:.0f}")
    print(f"acceptance rate: {ens.acceptance_rate():.4f}")
    return 0


# -- analyze -------------------------------------------------------------


def require_match(ens, graph):
    if not ens.matches(graph):
        raise ValueError(
            f"trace/graph hash mismatch: trace {ens.fingerprint}, "
            f"graph {graph.fingerprint()}"
        )


def cmd_analyze(args):
    opts = Options(args)
    out = outdir(opts)
    graph = read_graph(args.graph)
    ens = SampleEnsemble.load(args.trace)
    require_match(ens, graph)
    matrix = comembership_matrix(ens.g)
    with open(os.path.join(out, "comembership.csv"), "w") as fh:
        write_matrix_csv(matrix, graph.labels, fh)
    bins = opts.get("bins", 50, int)
    mode = opts.get("pairs_mode", "all")
    if mode == "ring":
        cliques = opts.get("cliques", None, int)
        size = opts.get("size", None, int)
        if cliques is None or size is None:
            print("error: --pairs-mode ring needs --cliques and --size", file=sys.stderr)
            return 2
        if cliques * size != graph.n:
            raise ValueError(f"ring layout {cliques}x{size} does not cover n={graph.n}")
        # node names carry the generator's numbering even after the
        # edge-list round trip renumbered the internal ids
        try:
            clique_of = [int(name) // size for name in graph.labels]
        except (TypeError, ValueError):
            raise ValueError("ring mode needs integer node names from the generator")
        classifier = ring_distance_classes(cliques, size, clique_of=clique_of)
    elif mode == "truth":
        truth_path = opts.get("truth", None)
        if truth_path is None:
            print("error: --pairs-mode truth needs --truth", file=sys.stderr)
            return 2
        classifier = membership_classes(read_labels(truth_path, graph))
    elif mode == "all":
        classifier = lambda i, j: "all"  # noqa: E731
    else:
        raise ValueError(f"unknown pairs mode {mode!r}")
    hist = stratified_histogram(matrix, classifier, bins=bins)
    payload = {
        str(label): {"bin_edges": entry["bin_edges"].tolist(),
                     "masses": entry["masses"].tolist()}
        for label, entry in hist.items()
    }
    with open(os.path.join(out, "histogram.json"), "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    top = opts.get("meet_top", 4, int)
    ranked = ens.best_of(top=top)
    meet = meet_partition([part.g for _, part in ranked])
    write_labels(os.path.join(out, "meet.txt"), graph.labels, meet.g)
    if opts.get("svg", False, bool):
        with open(os.path.join(out, "comembership.svg"), "w") as fh:
            fh.write(heatmap_svg(matrix))
    print(f"analyzed {len(ens)} records: comembership, {len(payload)} histogram "
          f"class(es), meet of top {len(ranked)}")
    return 0


# -- blocks --------------------------------------------------------------


def cmd_blocks(args):
    opts = Options(args)
    out = outdir(opts)
    ens = SampleEnsemble.load(args.trace)
    graph = None
    if args.graph is not None:
        graph = read_graph(args.graph)
        require_match(ens, graph)
    result = greedy_blocks(ens.g, max_samples=opts.get("max_samples", None, int))
    trace_path = os.path.join(out, "rmi_curve.csv")
    with open(trace_path, "w") as fh:
        result.trace.write_csv(fh)
    best_q = result.best_q()
    labels = result.labels()
    peak = float(result.trace.value.max())
    with open(os.path.join(out, "blocks.txt"), "w") as fh:
        fh.write(f"#blockkit-blocks n={ens.n} q={best_q} hash={ens.fingerprint}\n")
        fh.write(f"0 0 {peak!r} {best_q} " + " ".join(str(int(x)) for x in labels) + "\n")
    top = opts.get("top", 4, int)
    ranked = ens.best_of(top=top)
    with open(os.path.join(out, "misfits.csv"), "w") as fh:
        fh.write("rank,logp,k,misfits,misfit_nodes\n")
        for rank, (lp, part) in enumerate(ranked, start=1):
            _, count, mask = describe_division(labels, part.g)
            nodes = ";".join(str(i) for i in np.nonzero(mask)[0])
            fh.write(f"{rank},{float(lp)!r},{part.k},{count},{nodes}\n")
    if opts.get("svg", False, bool):
        with open(os.path.join(out, "rmi_curve.svg"), "w") as fh:
            fh.write(curve_svg(result.trace))
    print(f"blocks: peak at q={best_q} (mean RMI {peak:.6f}) over {len(ens)} records")
    return 0


# -- svg rendering -------------------------------------------------------


def curve_svg(trace, width=640, height=400):
    """Mean RMI against block count as a standalone line chart."""
    lm, rm, tm, bm = 60, 20, 20, 50
    iw, ih = width - lm - rm, height - tm - bm
    qs = trace.q.astype(float)
    vs = trace.value
    vmin, vmax = float(vs.min()), float(vs.max())
    if vmax == vmin:
        vmax = vmin + 1.0
    qmin, qmax = float(qs.min()), float(qs.max())

    def x(q):
        return lm + (q - qmin) / (qmax - qmin) * iw

    def y(v):
        return tm + (vmax - v) / (vmax - vmin) * ih

    pts = " ".join(f"{x(q):.2f},{y(v):.2f}" for q, v in zip(qs, vs))
    peak_q = trace.best_q()
    peak_v = float(vs.max())
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{lm}" y1="{tm + ih}" x2="{lm + iw}" y2="{tm + ih}" stroke="black"/>',
        f'<line x1="{lm}" y1="{tm}" x2="{lm}" y2="{tm + ih}" stroke="black"/>',
        f'<polyline points="{pts}" fill="none" stroke="#1f6fb2" stroke-width="1.5"/>',
        f'<circle cx="{x(peak_q):.2f}" cy="{y(peak_v):.2f}" r="4" fill="#b2321f"/>',
        f'<text x="{lm + iw / 2}" y="{height - 12}" text-anchor="middle" '
        f'font-size="13">blocks q (peak at {peak_q})</text>',
        f'<text x="16" y="{tm + ih / 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 16 {tm + ih / 2})">mean reduced MI</text>',
    ]
    for q in sorted({int(qmin), int(qmax), peak_q}):
        parts.append(f'<text x="{x(q):.2f}" y="{tm + ih + 16}" text-anchor="middle" '
                     f'font-size="11">{q}</text>')
    for v in (vmin, vmax):
        parts.append(f'<text x="{lm - 6}" y="{y(v) + 4:.2f}" text-anchor="end" '
                     f'font-size="11">{v:.3f}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def heatmap_svg(matrix, cell=6):
    """Comembership matrix as a grayscale grid, node order as given."""
    matrix = np.asarray(matrix)
    n = matrix.shape[0]
    pad = 4
    side = n * cell + 2 * pad
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{side}" height="{side}" '
        f'viewBox="0 0 {side} {side}">',
        f'<rect width="{side}" height="{side}" fill="white"/>',
    ]
    for i in range(n):
        for j in range(n):
            v = matrix[i, j]
            shade = int(round(255 * (1.0 - v)))
            if shade == 255:
                continue
            parts.append(
                f'<rect x="{pad + j * cell}" y="{pad + i * cell}" width="{cell}" '
                f'height="{cell}" fill="rgb({shade},{shade},{shade})"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# -- entry point ---------------------------------------------------------


def build_parser():
    top = argparse.ArgumentParser(
        prog="blockkit",
        description="Sample network divisions from the collapsed block-model "
                    "posterior and extract the building blocks they share.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")
        p.add_argument("--out", default=None, help="output directory (default .)")
        p.add_argument("--config", default=None, help="key=value config file; flags win")

    g = sub.add_parser("generate", help="write a synthetic network + ground truth")
    g.add_argument("model", choices=["ring-of-cliques", "dcsbm"])
    g.add_argument("--cliques", type=int, default=None, help="clique count (ring)")
    g.add_argument("--size", type=int, default=None, help="clique size (ring)")
    g.add_argument("--ports", choices=["fixed", "random"], default=None,
                   help="ring link endpoints: fixed ports or random per link")
    g.add_argument("--spec", default=None, help="JSON parameter file (dcsbm)")
    common(g)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("sample", help="run MH chains, write the sample trace")
    s.add_argument("input", help="edge list or .gml file")
    s.add_argument("--steps", type=int, default=None, help="MC steps per chain")
    s.add_argument("--burn-in", dest="burn_in", type=int, default=None)
    s.add_argument("--thin", type=int, default=None, help="record every thin-th step")
    s.add_argument("--chains", type=int, default=None)
    s.add_argument("--p", type=float, default=None,
                   help="rate hyperparameter override (default: density 2m/n^2)")
    common(s)
    s.set_defaults(func=cmd_sample)

    a = sub.add_parser("analyze", help="comembership matrix, histograms, meet")
    a.add_argument("trace", help="sample trace file")
    a.add_argument("--graph", required=True, help="the graph the trace came from")
    a.add_argument("--bins", type=int, default=None, help="histogram bins (default 50)")
    a.add_argument("--pairs-mode", dest="pairs_mode",
                   choices=["all", "truth", "ring"], default=None)
    a.add_argument("--truth", default=None, help="node-label file for --pairs-mode truth")
    a.add_argument("--cliques", type=int, default=None, help="ring layout (pairs-mode ring)")
    a.add_argument("--size", type=int, default=None, help="ring layout (pairs-mode ring)")
    a.add_argument("--meet-top", dest="meet_top", type=int, default=None,
                   help="meet of the K best divisions (default 4)")
    a.add_argument("--svg", action="store_const", const=True, default=None,
                   help="also render the comembership heatmap as SVG")
    common(a)
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("blocks", help="greedy building blocks + merge trace")
    b.add_argument("trace", help="sample trace file")
    b.add_argument("--graph", default=None, help="verify the trace matches this graph")
    b.add_argument("--top", type=int, default=None,
                   help="misfit report covers the K best divisions (default 4)")
    b.add_argument("--max-samples", dest="max_samples", type=int, default=None,
                   help="even subsample cap for the merge scores (default: all)")
    b.add_argument("--svg", action="store_const", const=True, default=None,
                   help="also render the RMI curve as SVG")
    common(b)
    b.set_defaults(func=cmd_blocks)
    return top


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GraphParseError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
