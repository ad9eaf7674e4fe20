"""Time the numba kernels against their pure-numpy twins.

    python benchmarks/bench_kernels.py [--repeat N] [--scale S]

Each pair runs once untimed (so numba compiles, or loads from its cache)
and then ``--repeat`` times; the best wall time is reported.
"""

import argparse
import time

import numpy as np

from sparse_moments._jit import HAVE_NUMBA
from sparse_moments._kernels import KERNEL_PAIRS
from sparse_moments.moments import binom


def make_args(name, scale, rng):
    if name == "min_cost_flow":
        n = 8 * scale
        return rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n)), rng.uniform(0, 2, (n, n)), 100_000
    if name == "esym":
        K = 6
        b = (rng.random((20_000 * scale, K)) < 0.4).astype(float)
        return b, K, np.array([binom(K, t) for t in range(K + 1)], dtype=float)
    if name == "block_products":
        K = 6
        n = 5_000 * scale
        perms = np.array([rng.permutation(K) for _ in range(8)], dtype=np.int64)
        pairs = np.array([(i, j) for i in range(K + 1) for j in range(K + 1 - i)], dtype=np.int64)
        return rng.random((n, K)), rng.random((n, K)), perms, pairs
    if name == "grid2":
        g = 100 * scale
        xs = np.linspace(0, 1, g + 1)
        powers = xs[:, None] ** np.arange(1, 4)[None, :]
        target = np.ascontiguousarray(0.3 * powers[g // 5] + 0.7 * powers[4 * g // 5])
        return powers, target, g
    raise KeyError(name)


def best_time(fn, args, repeat):
    fn(*args)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--scale", type=int, default=1, help="problem-size multiplier")
    args = p.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not importable; both columns time the numpy code")
    rng = np.random.Generator(np.random.Philox(0))
    print(f"{'kernel':<16}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, (fast, slow) in KERNEL_PAIRS.items():
        kargs = make_args(name, args.scale, rng)
        tf = best_time(fast, kargs, args.repeat)
        ts = best_time(slow, kargs, args.repeat)
        print(f"{name:<16}{tf * 1e3:>12.3f}{ts * 1e3:>12.3f}{ts / tf:>9.1f}x")


if __name__ == "__main__":
    main()
