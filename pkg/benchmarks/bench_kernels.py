"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--arity 10] [--repeat 3]
"""

import argparse
import time

import numpy as np

from boolresp import kernels
from boolresp.formula import NONMONOTONIC, compile_formula, random_formula


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def workloads(arity, rng):
    f = random_formula(arity, NONMONOTONIC, False, rng)
    p = compile_formula(f)
    table = kernels.truth_table(p)
    bases = rng.integers(0, 1 << p.arity, 64).tolist()
    vals = rng.integers(0, 1 << 12, 4096)
    knowns = rng.integers(0, 1 << 12, 4096)
    return {
        "truth_table": lambda impl: kernels.truth_table(p, impl=impl),
        "witness_sizes x64": lambda impl: [kernels.witness_sizes(table, p.arity, b, impl=impl) for b in bases],
        "min_flip_size x64": lambda impl: [kernels.min_flip_size(table, p.arity, b, impl=impl) for b in bases],
        "k3_eval_many x4096": lambda impl: kernels.k3_eval_many(p, vals, knowns, impl=impl),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--arity", type=int, default=10)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if "cython" not in kernels.BACKENDS:
        print("compiled extension not available; only the fallback can be timed")
    names = sorted(kernels.BACKENDS)
    print(f"arity {args.arity}, best of {args.repeat}")
    print(f"{'kernel':<20}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, fn in workloads(args.arity, np.random.default_rng(args.seed)).items():
        times = {n: _best(lambda: fn(kernels.BACKENDS[n]), args.repeat) for n in names}
        row = f"{label:<20}" + "".join(f"{times[n] * 1e3:>10.2f}ms" for n in names)
        if len(names) > 1:
            row += f"{times['python'] / times['cython']:>11.0f}x"
        print(row)


if __name__ == "__main__":
    main()
