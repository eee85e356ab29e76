"""Compare the compiled and numpy kernels, then time one full solve per backend.

Run with ``python3 benchmarks/bench_kernels.py``.
"""
import argparse
import timeit

import numpy as np

from orliczkit.kernels import _fallback
from orliczkit.nfunction import NFunctionSpec, build
from orliczkit.radial import make_grid
from orliczkit.solver import SolverConfig, make_problem, mountain_pass_solve

try:
    from orliczkit.kernels import _core
except ImportError:  # extension not built
    _core = None

FAMILIES = [("power", (2.5, 0.0, 0.0), 0), ("power_sum", (2.0, 3.0, 0.0), 1),
            ("curvature", (0.0, 0.0, 1.5), 2), ("power_log", (2.6, 0.0, 0.0), 3)]


def kernel_inputs(M, seed=0):
    grid = make_grid(3, 20.0, M)
    rng = np.random.default_rng(seed)
    u = np.exp(-grid.nodes**2) * rng.uniform(0.5, 1.5, M + 1)
    V = np.ones(M + 1)
    return u, grid.cell_widths, grid.cell_measures, grid.weights, V


def best_of(fn, repeat=5):
    n, _ = timeit.Timer(fn).autorange()
    return min(timeit.Timer(fn).repeat(repeat, n)) / n


def bench_kernels(sizes):
    print(f"{'family':<10} {'M':>7} {'kernel':<14} {'numpy [us]':>11} {'cython [us]':>12} {'speedup':>8}")
    for name, params, code in FAMILIES:
        for M in sizes:
            args = (code, params, 3.5) + kernel_inputs(M)
            calls = {
                "energy_parts": lambda m: m.energy_parts(*args),
                "gradient": lambda m: m.gradient(*args),
                "hessian_bands": lambda m: m.hessian_bands(*args, 1e-12, True),
            }
            for kname, call in calls.items():
                t_py = best_of(lambda: call(_fallback)) * 1e6
                if _core is None:
                    print(f"{name:<10} {M:>7} {kname:<14} {t_py:>11.1f} {'n/a':>12} {'n/a':>8}")
                    continue
                t_cy = best_of(lambda: call(_core)) * 1e6
                print(f"{name:<10} {M:>7} {kname:<14} {t_py:>11.1f} {t_cy:>12.1f} {t_py / t_cy:>7.1f}x")


def bench_solve(M):
    nf = build(NFunctionSpec("power_sum", p=2.0, q=3.0))
    grid = make_grid(4, 20.0, M)
    print(f"\nfull mountain-pass solve, PowerSum(2,3), N=4, q=3.5, M={M}")
    for backend in ("python", "cython"):
        if backend == "cython" and _core is None:
            continue
        prob = make_problem(nf, grid, q=3.5, backend=backend)
        t = timeit.default_timer()
        rep = mountain_pass_solve(prob, SolverConfig())
        dt = timeit.default_timer() - t
        print(f"  {backend:<7} {dt:7.2f} s  c = {rep.c:.10g}  residual = {rep.residual_norm:.2e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1000, 10000, 100000])
    ap.add_argument("--solve-nodes", type=int, default=4000)
    args = ap.parse_args()
    bench_kernels(args.sizes)
    bench_solve(args.solve_nodes)
