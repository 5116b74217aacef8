"""Time the UCB-N round kernel on every available backend.

Usage: python benchmarks/bench_kernels.py [--k 64] [--T 100000] [--repeat 3]

Both backends consume the same noise matrix, so their outputs are also
checked for exact agreement.
"""
import argparse
import time

import numpy as np

from fgbandit import kernels
from fgbandit.env import Instance
from fgbandit.graph import GraphSpec, generate


def run(mod, g, inst, noise):
    indptr, indices = g.csr
    counts = np.zeros(g.k)
    sums = np.zeros(g.k)
    played = np.empty(noise.shape[0], dtype=np.int64)
    t0 = time.perf_counter()
    mod.ucbn_rounds(indptr, indices, inst.means, inst.sigma, noise, counts, sums, 1, played)
    return time.perf_counter() - t0, played


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--k", type=int, default=64)
    parser.add_argument("--T", type=int, default=100_000)
    parser.add_argument("--p", type=float, default=0.1, help="edge probability of the test graph")
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    g = generate(GraphSpec("erdos_renyi", {"k": args.k, "p": args.p, "seed": args.seed}))
    inst = Instance(rng.uniform(0.2, 0.8, args.k))
    noise = rng.standard_normal((args.T, args.k))

    found = kernels.backends()
    print(f"k={args.k} T={args.T} edges={len(g.edges())} default backend: {kernels.BACKEND}")
    timings, outputs = {}, {}
    for name, mod in found.items():
        best = np.inf
        for _ in range(args.repeat):
            elapsed, played = run(mod, g, inst, noise)
            best = min(best, elapsed)
        timings[name], outputs[name] = best, played
        print(f"{name:>7}: {best:8.3f} s  ({args.T / best / 1e6:.2f} M rounds/s)")
    if len(found) > 1:
        same = np.array_equal(outputs["python"], outputs["cython"])
        print(f"speedup cython/python: {timings['python'] / timings['cython']:.1f}x, identical plays: {same}")
    else:
        print("compiled extension not available; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
