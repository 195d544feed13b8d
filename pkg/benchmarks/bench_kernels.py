"""Time the compiled projection kernel against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 100000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from expcone import _kernels_py

try:
    from expcone import _kernels
except ImportError:
    _kernels = None


def sample(n, seed=0):
    rng = np.random.default_rng(seed)
    P = rng.standard_normal((n, 3)) * 10 ** rng.uniform(-3, 2, (n, 1))
    return np.ascontiguousarray(P)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    P = sample(args.n)
    kernels = {"numpy": _kernels_py.project_batch}
    if _kernels is not None:
        kernels["compiled"] = _kernels.project_batch
    else:
        print("compiled extension not built; timing the numpy kernel only")
    best = {}
    for name, fn in kernels.items():
        fn(P[:100], 200)
        t = min(timeit.repeat(lambda: fn(P, 200), number=1, repeat=args.repeat))
        best[name] = t
        print(f"{name:>9}: {t * 1e3:9.2f} ms for {args.n} points ({t / args.n * 1e9:7.1f} ns/point)")
    if len(best) == 2:
        a = _kernels_py.project_batch(P, 200)
        b = _kernels.project_batch(P, 200)
        diff = np.abs(a[2] - b[2]).max()
        print(f"  speedup: {best['numpy'] / best['compiled']:.1f}x, max distance difference {diff:.1e}")


if __name__ == "__main__":
    main()
