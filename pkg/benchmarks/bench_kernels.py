"""Benchmark the compiled kernels against the numpy fallback.

The box fill and ball bisection sit inside the bet optimizer's line
search, so per-call overhead translates directly into solve time.

Run:  python benchmarks/bench_kernels.py [--repeats 2000]
"""

import argparse
import time

import numpy as np

from robust_kelly import _kernels_py as py_impl

try:
    from robust_kelly import _kernels_cy as cy_impl
except ImportError:
    cy_impl = None


def timeit(fn, args_list, repeats):
    best = np.inf
    for _ in range(3):
        t0 = time.perf_counter()
        for args in args_list[:repeats]:
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / min(repeats, len(args_list)))
    return best * 1e6  # microseconds per call


def make_cases(K, count, rng):
    cases = {"growth_vector": [], "box_fill": [], "project_simplex": [], "ball_worst": []}
    for _ in range(count):
        x = rng.normal(size=K)
        nom = rng.dirichlet(np.ones(K))
        rho = rng.uniform(0.0, 0.3, size=K)
        cases["growth_vector"].append((np.abs(rng.normal(size=K)) + 0.01,))
        cases["box_fill"].append((x, np.maximum(nom - rho, 0.0), nom + rho))
        cases["project_simplex"].append((rng.normal(size=K),))
        cases["ball_worst"].append((x, nom, float(rng.uniform(0.05, 0.4))))
    return cases


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=500)
    ap.add_argument("--sizes", type=str, default="10,50,190,1000")
    args = ap.parse_args()

    if cy_impl is None:
        print("compiled backend not built; showing numpy fallback only")
    rng = np.random.default_rng(0)
    sizes = [int(s) for s in args.sizes.split(",")]
    header = f"{'kernel':<16}{'K':>6}{'numpy us':>12}{'cython us':>12}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for K in sizes:
        reps = max(20, args.repeats // max(1, K // 50))
        cases = make_cases(K, min(reps, 200), rng)
        for name, arglist in cases.items():
            t_py = timeit(getattr(py_impl, name), arglist, reps)
            if cy_impl is not None:
                t_cy = timeit(getattr(cy_impl, name), arglist, reps)
                print(f"{name:<16}{K:>6}{t_py:>12.1f}{t_cy:>12.1f}{t_py / t_cy:>9.2f}x")
            else:
                print(f"{name:<16}{K:>6}{t_py:>12.1f}{'-':>12}{'-':>9}")
    # consistency spot check between backends
    if cy_impl is not None:
        x = rng.normal(size=50)
        nom = rng.dirichlet(np.ones(50))
        rho = rng.uniform(0.0, 0.2, size=50)
        p1, g1 = py_impl.box_fill(x, np.maximum(nom - rho, 0), nom + rho)
        p2, g2 = cy_impl.box_fill(x, np.maximum(nom - rho, 0), nom + rho)
        assert np.array_equal(p1, p2) and g1 == g2
        print("\nbackends agree bit-for-bit on a spot check")


if __name__ == "__main__":
    main()
