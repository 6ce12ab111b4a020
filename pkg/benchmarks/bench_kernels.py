"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Each workload goes through the public API; the backend is swapped by
rebinding the functions on ``gpfq.kernels``.  Results must agree.
"""
import argparse
import time

from gpfq import kernels
from gpfq import _kernels_py
from gpfq.containers import ContainerParams, iterate_containers
from gpfq.geometry import PointSet
from gpfq.lab import alpha_search, count_gp_sets, sample_subset
from gpfq.supersat import tuple_census_bruteforce

NAMES = ("mis_search", "count_independent", "container_tree", "tuple_census")


def workloads():
    return {
        "mis_search: alpha of 80 points of F_13^2": lambda: alpha_search(sample_subset(13, 2, 80, 3)).lower,
        "count_independent: gp sets of F_4^2": lambda: [r.count for r in count_gp_sets(4, 2)],
        "container_tree: triples family, q=11": lambda: len(iterate_containers(11, 2, ContainerParams(), 1)),
        "tuple_census: 40 points of F_5^3": lambda: tuple_census_bruteforce(sample_subset(5, 3, 40, 1)),
    }


def use(module):
    for name in NAMES:
        setattr(kernels, name, getattr(module, name))


def best_of(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.BACKEND != "compiled":
        raise SystemExit("compiled extension not built; run pip install -e . first")
    compiled = {name: getattr(kernels, name) for name in NAMES}

    class Compiled:
        pass

    for name, fn in compiled.items():
        setattr(Compiled, name, staticmethod(fn))

    print(f"{'workload':44s} {'compiled s':>11s} {'python s':>10s} {'speedup':>8s}")
    for label, fn in workloads().items():
        use(Compiled)
        a, tc = best_of(fn, args.repeat)
        use(_kernels_py)
        b, tp = best_of(fn, max(1, args.repeat // 3))
        use(Compiled)
        if a != b:
            raise SystemExit(f"{label}: backends disagree ({a!r} vs {b!r})")
        print(f"{label:44s} {tc:11.4f} {tp:10.4f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
