"""Benchmark: native kernel extension vs. pure-Python fallback.

Builds a synthetic 10k-unit CSR workload (the shape the index produces
for a mid-sized collection) and times each kernel on both backends.

    python benchmarks/bench_kernels.py [--units 10000] [--repeat 5]
"""

import argparse
import random
import time
from array import array

from textsleuth._kernels import pure

try:
    from textsleuth._kernels import _native as native
except ImportError:
    native = None


def build_workload(n_units, vocab=20_000, tokens_per_unit=90, seed=7):
    rng = random.Random(seed)
    indptr = array("q", [0])
    keys = array("q")
    counts = array("q")
    adj_indptr = array("q", [0])
    adj_keys = array("q")
    adj_counts = array("q")
    for _ in range(n_units):
        per_unit = {}
        stream = [
            rng.randrange(200) if rng.random() < 0.7 else rng.randrange(vocab)
            for _ in range(tokens_per_unit)
        ]
        for tid in stream:
            per_unit[tid] = per_unit.get(tid, 0) + 1
        for tid in sorted(per_unit):
            keys.append(tid)
            counts.append(per_unit[tid])
        indptr.append(len(keys))
        pairs = {}
        for x, y in zip(stream, stream[1:]):
            key = (x << 32) | y
            pairs[key] = pairs.get(key, 0) + 1
        for key in sorted(pairs):
            adj_keys.append(key)
            adj_counts.append(pairs[key])
        adj_indptr.append(len(adj_keys))
    selected = array("q", range(n_units))
    return {
        "terms": (indptr, keys, counts),
        "adjacency": (adj_indptr, adj_keys, adj_counts),
        "selected": selected,
    }


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--units", type=int, default=10_000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    work = build_workload(args.units)
    indptr, keys, counts = work["terms"]
    adj_indptr, adj_keys, adj_counts = work["adjacency"]
    selected = work["selected"]
    rng = random.Random(11)
    a_values = array("q", [rng.randint(0, 500) for _ in range(20_000)])
    b_values = array("q", [rng.randint(0, 100_000) for _ in range(20_000)])
    allowed = list(range(0, 100, 2))

    cases = [
        ("ll_scores (20k terms)", lambda m: m.ll_scores(a_values, b_values, 10**6, 10**8)),
        (
            "aggregate_counts (terms)",
            lambda m: m.aggregate_counts(indptr, keys, counts, selected),
        ),
        (
            "aggregate_counts (adjacency)",
            lambda m: m.aggregate_counts(adj_indptr, adj_keys, adj_counts, selected),
        ),
        ("presence_counts", lambda m: m.presence_counts(indptr, keys, selected)),
        (
            "pair_presence_counts (50 nodes)",
            lambda m: m.pair_presence_counts(indptr, keys, selected, allowed),
        ),
    ]

    print(f"workload: {args.units} units, best of {args.repeat} runs\n")
    header = f"{'kernel':34} {'pure':>10} {'native':>10} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, fn in cases:
        t_pure = timeit(lambda: fn(pure), args.repeat)
        if native is not None:
            t_native = timeit(lambda: fn(native), args.repeat)
            if fn(native) != fn(pure):
                raise AssertionError(f"backend results differ for {name}")
            print(
                f"{name:34} {t_pure * 1000:8.1f}ms {t_native * 1000:8.1f}ms "
                f"{t_pure / t_native:8.1f}x"
            )
        else:
            print(f"{name:34} {t_pure * 1000:8.1f}ms {'n/a':>10} {'n/a':>9}")
    if native is None:
        print("\nnative extension not built; install with a C++ toolchain to compare")


if __name__ == "__main__":
    main()
