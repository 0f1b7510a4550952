"""Timing comparison of the compiled and numpy scan kernels.

Both backends are imported directly (bypassing the import-time selection)
and timed on identical inputs: equilibrium enumeration over random dense
games and hyperplane vertex counting over random integer slabs.  Results
are best-of-`repeats` wall times per call.

Usage: python3 benchmarks/bench_kernels.py [--sizes 12,16,20] [--repeats 5]
"""
import argparse
import time

import numpy as np

from liglearn import _kernels_np

try:
    from liglearn import _core
except ImportError:
    _core = None


def _games(rng, n, count):
    games = []
    for _ in range(count):
        W = rng.standard_normal((n, n))
        np.fill_diagonal(W, 0.0)
        games.append((W, rng.standard_normal(n)))
    return games


def _best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_equilibria(backends, sizes, repeats, rng):
    print(f"{'equilibria_ids':<18}" + "".join(f"{name:>14}" for name, _ in backends)
          + ("   speedup" if len(backends) == 2 else ""))
    for n in sizes:
        games = _games(rng, n, max(1, 2 ** (20 - n)))
        times = []
        for _, impl in backends:
            per_call = _best_of(
                lambda impl=impl: [impl.equilibria_ids(W, b, 0.0)
                                   for W, b in games],
                repeats) / len(games)
            times.append(per_call)
        row = f"n={n:<16}" + "".join(f"{t * 1e3:>12.3f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[1] / times[0]:>9.1f}x"
        print(row)


def bench_hyperplane(backends, sizes, repeats, rng):
    print(f"\n{'hyperplane_hits':<18}" + "".join(f"{name:>14}" for name, _ in backends)
          + ("   speedup" if len(backends) == 2 else ""))
    for d in sizes:
        slabs = [(rng.integers(-3, 4, d).astype(np.float64),
                  float(rng.integers(-3, 4))) for _ in range(max(1, 2 ** (20 - d)))]
        times = []
        for _, impl in backends:
            per_call = _best_of(
                lambda impl=impl: [impl.hyperplane_hits(w, b, 0.0)
                                   for w, b in slabs],
                repeats) / len(slabs)
            times.append(per_call)
        row = f"d={d:<16}" + "".join(f"{t * 1e3:>12.3f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[1] / times[0]:>9.1f}x"
        print(row)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="12,16,20",
                        help="comma list of player counts")
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    backends = []
    if _core is not None:
        backends.append(("compiled", _core))
    else:
        print("compiled extension not built; timing the numpy backend only")
    backends.append(("numpy", _kernels_np))

    rng = np.random.default_rng(args.seed)
    for name, impl in backends:
        sample = impl.equilibria_ids(np.zeros((2, 2)), np.zeros(2), 0.0)
        assert list(sample) == [0, 1, 2, 3], f"{name} backend self-check failed"

    bench_equilibria(backends, sizes, args.repeats, rng)
    bench_hyperplane(backends, sizes, args.repeats, rng)


if __name__ == "__main__":
    main()
