"""Time the compiled balanced-sampler core against the pure-Python mirror.

Both cores consume the RNG in lockstep, so on the same seed they must
return identical edge arrays; this script asserts that before timing.
Run from the repo root after an editable install:

    python3 benchmarks/sampler_bench.py
    python3 benchmarks/sampler_bench.py --repeats 9 --seed 3
"""

import argparse
import math
import time

import numpy as np

from umpc.sampling import _core_py

try:
    from umpc.sampling import _core
except ImportError:
    _core = None

CASES = [
    # (n, k, m)
    (50, 2, 100),
    (200, 2, 1_000),
    (500, 2, 10_000),
    (500, 2, 62_375),  # half of C(500, 2)
    (2_000, 2, 50_000),
    (100, 3, 2_000),
    (1_000, 3, 20_000),
]


def run_core(core, n, k, m, seed):
    cap = -(-(k * m) // n)
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    edges, _, _ = core.balanced_sample_core(n, k, m, cap, 100 * m, 64, rng)
    return time.perf_counter() - t0, edges


def best_of(core, n, k, m, seed, repeats):
    times = []
    edges = None
    for _ in range(repeats):
        dt, edges = run_core(core, n, k, m, seed)
        times.append(dt)
    return min(times), edges


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5, help="timings per case, best-of")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if _core is None:
        print("compiled core not built; showing the pure-Python mirror only")

    header = f"{'n':>6} {'k':>2} {'m':>7} {'python':>12} {'compiled':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n, k, m in CASES:
        if m > math.comb(n, k):
            continue
        t_py, e_py = best_of(_core_py, n, k, m, args.seed, args.repeats)
        if _core is None:
            print(f"{n:>6} {k:>2} {m:>7} {t_py * 1e3:>10.2f}ms {'-':>12} {'-':>8}")
            continue
        t_cy, e_cy = best_of(_core, n, k, m, args.seed, args.repeats)
        if not np.array_equal(e_py, e_cy):
            raise AssertionError(f"cores disagree on n={n} k={k} m={m} seed={args.seed}")
        print(
            f"{n:>6} {k:>2} {m:>7} {t_py * 1e3:>10.2f}ms {t_cy * 1e3:>10.2f}ms"
            f" {t_py / t_cy:>7.1f}x"
        )


if __name__ == "__main__":
    main()
