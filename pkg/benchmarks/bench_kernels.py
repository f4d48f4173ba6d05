"""Compare the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--trunc 10000] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from rfrr import _kernels_py as py

try:
    from rfrr import _kernels as compiled
except ImportError:
    compiled = None


def cases(trunc):
    k = np.arange(1, trunc + 1, dtype=float)
    eigs, target = k**-2.0, k**-1.25
    nu2_0 = 1e-3 / 1000 + eigs.sum() / 500
    return {
        "trace_power": lambda m: m.trace_power(eigs, 1e-3, 1, 1),
        "resolvent_sums": lambda m: m.resolvent_sums(eigs, target, 1e-3),
        "iterate_fixed_point": lambda m: m.iterate_fixed_point(
            eigs, 1000.0, 500.0, 1e-3, nu2_0, 1e-10, 100_000, 1.0, 100),
        "t_sum": lambda m: m.t_sum(0, 1.0, 1.0, 1e-4, 2.0, trunc),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trunc", type=int, default=10_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if compiled is None:
        print("compiled extension not built; only the fallback is timed")
    print(f"trunc={args.trunc}")
    print(f"{'kernel':<22}{'python [ms]':>14}{'compiled [ms]':>16}{'speedup':>10}")
    for name, fn in cases(args.trunc).items():
        t_py = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat)) * 1e3
        if compiled is None:
            print(f"{name:<22}{t_py:>14.3f}{'-':>16}{'-':>10}")
            continue
        t_c = min(timeit.repeat(lambda: fn(compiled), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<22}{t_py:>14.3f}{t_c:>16.3f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
