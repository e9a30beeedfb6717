"""Compare the numba and pure-numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat N]

Times batched assembly plus LU solve over every spanning subgraph of the
two-lead K_n^e hosts, and orbit minimization for the classification sweep.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from rqgraph.families import open_kne
from rqgraph.kernels import numba_impl, numpy_impl
from rqgraph.scattering import edge_phases
from rqgraph.symmetry import _edge_perms


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def solve_case(n):
    host = open_kne(n)
    eu, ev, lengths = host.edge_arrays()
    masks = np.arange(1 << host.edge_count, dtype=np.uint64)
    z = edge_phases(lengths, 1.3)
    src = np.array([n - 1])

    def make(impl):
        def run():
            A, rhs, _ = impl.assemble(masks, eu, ev, z, host.lead_counts(), src)
            impl.lu_solve(A, rhs)
        return run
    return f"assemble+solve K{n}^e ({len(masks)} systems)", make


def orbit_case(n):
    host = open_kne(n)
    perms = _edge_perms(host)
    masks = np.arange(1 << host.edge_count, dtype=np.uint64)

    def make(impl):
        return lambda: impl.orbit_min(masks, perms)
    return f"orbit_min K{n}^e ({len(masks)} masks, {len(perms)} perms)", make


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    if numba_impl is None:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'case':<48} {'numpy [s]':>10} {'numba [s]':>10} {'speedup':>8}")
    for label, make in (solve_case(5), solve_case(6), orbit_case(6), orbit_case(7)):
        make(numba_impl)()  # compile outside the timing
        t_np = best_of(make(numpy_impl), args.repeat)
        t_nb = best_of(make(numba_impl), args.repeat)
        print(f"{label:<48} {t_np:>10.4f} {t_nb:>10.4f} {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
