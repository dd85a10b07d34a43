"""Time the compiled and pure-Python kernels on the same workloads.

Runs the chain kernel on a 100-node ring of cliques and the greedy merge
kernel on an ensemble sampled from it, then prints steps/sec and merge
times side by side.  Useful to check the compiled module actually built
and what the fallback costs.
"""

import argparse
import time

import numpy as np

from blockkit import _pycore, ring_of_cliques
from blockkit._backend import HAS_EXT
from blockkit.blocks import greedy_blocks


def time_chain(run_chain, graph, steps, seed):
    t0 = time.perf_counter()
    out = run_chain(graph, steps=steps, seed=seed, burn_in=steps // 10,
                    thin=max(1, steps // 1000))
    dt = time.perf_counter() - t0
    return steps / dt, out


def time_greedy(columns_cls, samples, reps):
    # score the pure merge loop: repeated full pair sweeps + one merge
    ns, n = samples.shape
    lgf = np.append(0.0, np.cumsum(np.log(np.arange(1, ns * n + 2, dtype=float))))
    t0 = time.perf_counter()
    for _ in range(reps):
        cols = columns_cls(samples, lgf)
        while cols.ncols() > 1:
            best, arg = -np.inf, (0, 1)
            for i in range(cols.ncols()):
                for j in range(i + 1, cols.ncols()):
                    s = cols.pairsum(i, j)
                    if s > best:
                        best, arg = s, (i, j)
            cols.merge(*arg)
    return (time.perf_counter() - t0) / reps


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=500_000,
                    help="chain steps per backend (default 5e5)")
    ap.add_argument("--records", type=int, default=200,
                    help="ensemble size for the merge benchmark")
    ap.add_argument("--reps", type=int, default=3,
                    help="merge benchmark repetitions")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    graph, _ = ring_of_cliques(20, 5)
    print(f"graph: ring of cliques, n={graph.n} m={graph.m}")
    print(f"chain kernel, {args.steps} steps:")

    backends = [("python", _pycore.run_chain, _pycore.GreedyColumns)]
    if HAS_EXT:
        from blockkit import _core
        backends.insert(0, ("compiled", _core.run_chain, _core.GreedyColumns))
    else:
        print("  (compiled module not built, timing the fallback only)")

    rates = {}
    for name, run_chain, _ in backends:
        rate, out = time_chain(run_chain, graph, args.steps, args.seed)
        rates[name] = rate
        print(f"  {name:9s} {rate:12.0f} steps/s   "
              f"(accept {out['accepts'] / max(1, out['proposals']):.3f})")
    if len(rates) == 2:
        print(f"  speedup   {rates['compiled'] / rates['python']:12.1f}x")

    rec = out["rec_g"][: args.records]
    if rec.shape[0] < args.records:
        rec = np.tile(rec, (args.records // max(1, rec.shape[0]) + 1, 1))[: args.records]
    print(f"greedy merge kernel, {rec.shape[0]} records x {graph.n} nodes:")
    times = {}
    for name, _, columns_cls in backends:
        dt = time_greedy(columns_cls, rec, args.reps)
        times[name] = dt
        print(f"  {name:9s} {dt:12.3f} s per full merge sequence")
    if len(times) == 2:
        print(f"  speedup   {times['python'] / times['compiled']:12.1f}x")

    t0 = time.perf_counter()
    greedy_blocks(rec)
    print(f"greedy_blocks (fast path, selected backend): "
          f"{time.perf_counter() - t0:.3f} s")


if __name__ == "__main__":
    main()
