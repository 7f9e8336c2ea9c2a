#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Sizes mirror a realistic workload: a ~760-concept hierarchy and a
~720-axiom training set for the square build, plus single-candidate
encoding.  Results are verified identical across backends before timing.

Usage: python benchmarks/bench_kernels.py [--concepts 762] [--axioms 722]
"""

import argparse
import time

import numpy as np

from axiolearn._kernels import _fallback

try:
    from axiolearn._kernels import _native
except ImportError:
    _native = None


def cost_rows(rng, m, n):
    """Ancestor-cost-like matrix: mostly inf, finite on a sparse upper set."""
    g = np.full((m, n), np.inf)
    g[:, 0] = rng.uniform(0.5, 3.0, size=m)  # the shared root column
    for i in range(m):
        reachable = rng.integers(0, n, size=rng.integers(3, 18))
        g[i, reachable] = rng.uniform(0.0, 3.0, size=len(reachable))
    return g


def sym_matrix(rng, n):
    v = rng.uniform(0.0, 1.0, size=(n, n))
    v = (v + v.T) / 2
    np.fill_diagonal(v, 1.0)
    return np.ascontiguousarray(v)


def bench(label, variants, repeats=3):
    outputs, timings = {}, {}
    for name, fn in variants.items():
        if fn is None:
            continue
        best = float("inf")
        for _ in range(repeats):
            started = time.perf_counter()
            outputs[name] = fn()
            best = min(best, time.perf_counter() - started)
        timings[name] = best
    names = list(timings)
    if len(names) == 2:
        a, b = names
        assert np.array_equal(outputs[a], outputs[b]), f"{label}: backend results differ"
        speedup = timings["python"] / timings["native"]
        extra = f"  speedup x{speedup:.1f}"
    else:
        extra = "  (compiled backend not built)"
    print(f"{label:<34}" + "".join(f"{n}: {timings[n]*1000:9.2f} ms  " for n in names) + extra)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--concepts", type=int, default=762)
    parser.add_argument("--axioms", type=int, default=722)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    m, n = args.concepts, args.concepts + 1
    g = cost_rows(rng, m, n)
    v = sym_matrix(rng, m)
    li = rng.integers(0, m, size=args.axioms).astype(np.intp)
    ri = rng.integers(0, m, size=args.axioms).astype(np.intp)
    cl = rng.integers(0, m, size=1).astype(np.intp)
    cr = rng.integers(0, m, size=1).astype(np.intp)

    def run_minplus(impl):
        out = np.empty((m, m))
        impl.minplus_block(g, 0, m, out)
        return out

    def run_pairs(impl):
        out = np.empty((args.axioms, args.axioms))
        impl.pair_matrix_block(v, li, ri, True, False, 0, args.axioms, out)
        return out

    def run_encode(impl):
        out = np.empty((1, args.axioms))
        impl.pair_rect(v, cl, cr, li, ri, True, False, out)
        return out

    print(f"concepts={args.concepts} axioms={args.axioms}")
    for label, runner in [
        (f"concept distances ({m}x{m} minplus)", run_minplus),
        (f"axiom matrix ({args.axioms}^2 pairs)", run_pairs),
        ("candidate encoding (1 axiom)", run_encode),
    ]:
        bench(
            label,
            {
                "native": (lambda r=runner: r(_native)) if _native else None,
                "python": lambda r=runner: r(_fallback),
            },
        )


if __name__ == "__main__":
    main()
