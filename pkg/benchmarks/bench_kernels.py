"""Timing comparison of the numba kernels against the numpy fallbacks.

Runs each hot kernel on a representative workload with both implementations
and reports best-of-N wall times, then times one full transform end to end
in a subprocess per backend (the backend is chosen at import, so it cannot
be switched in-process).

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

import opaa._kernels as kernels
from opaa.hermite import build_table
from opaa.quadrature import gauss_hermite


def best_of(repeat, fn, *args):
    fn(*args)  # warm (JIT compile, cache fill)
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def kernel_pairs():
    pairs = [
        ("decode_linear_indices", kernels.decode_linear_indices_numpy),
        ("weight_products", kernels.weight_products_numpy),
        ("shell_partial_sums", kernels.shell_partial_sums_numpy),
        ("tridiag_ql", kernels.tridiag_ql_numpy),
    ]
    out = []
    for name, numpy_impl in pairs:
        numba_impl = getattr(kernels, name + "_numba", None)
        out.append((name, numpy_impl, numba_impl))
    return out


def build_workloads():
    order, dim = 16, 4
    rule = gauss_hermite(order)
    total = order**dim
    idx = kernels.decode_linear_indices_numpy(0, total, order, dim)
    rng = np.random.default_rng(11)
    g = rng.normal(size=total)
    table = build_table(8, rule.nodes)
    shell = kernels.decode_linear_indices_numpy(0, 9**dim, 9, dim)
    taus = np.ascontiguousarray(shell[np.sum(shell, axis=1) == 6])
    diag = np.zeros(128)
    off = np.sqrt(np.arange(1.0, 128.0) / 2.0)
    return {
        "decode_linear_indices": (0, total, order, dim),
        "weight_products": (idx, rule.weights),
        "shell_partial_sums": (idx, g, table.values, taus),
        "tridiag_ql": (diag, off),
    }


def time_end_to_end(no_numba):
    code = (
        "import time; t0 = time.perf_counter();"
        "from opaa.core import run_opaa;"
        "from opaa.models import GaussianIdentity;"
        "r = run_opaa(GaussianIdentity(3), 32, max_degree=8, tol=1e-14);"
        "t1 = time.perf_counter();"
        "run_opaa(GaussianIdentity(3), 32, max_degree=8, tol=1e-14);"
        "print(time.perf_counter() - t1)"
    )
    env = os.environ.copy()
    if no_numba:
        env["OPAA_NO_NUMBA"] = "1"
    else:
        env.pop("OPAA_NO_NUMBA", None)
    proc = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env
    )
    if proc.returncode != 0:
        raise RuntimeError(proc.stderr)
    return float(proc.stdout.strip())


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5, help="timing repeats")
    args = parser.parse_args()

    print(f"active backend: {kernels.BACKEND} (numba available: {kernels.NUMBA_AVAILABLE})")
    workloads = build_workloads()
    print(f"{'kernel':<24} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for name, numpy_impl, numba_impl in kernel_pairs():
        t_np = best_of(args.repeat, numpy_impl, *workloads[name])
        if numba_impl is None:
            print(f"{name:<24} {t_np * 1e3:>10.3f}ms {'n/a':>12} {'n/a':>9}")
            continue
        t_nb = best_of(args.repeat, numba_impl, *workloads[name])
        print(
            f"{name:<24} {t_np * 1e3:>10.3f}ms {t_nb * 1e3:>10.3f}ms "
            f"{t_np / t_nb:>8.1f}x"
        )

    print("\nfull transform, identity target, dim=3, order=32 (warm, subprocess):")
    t_fallback = time_end_to_end(no_numba=True)
    print(f"{'numpy fallback':<24} {t_fallback * 1e3:>10.3f}ms")
    if kernels.NUMBA_AVAILABLE:
        t_fast = time_end_to_end(no_numba=False)
        print(f"{'numba':<24} {t_fast * 1e3:>10.3f}ms {t_fallback / t_fast:>8.1f}x")


if __name__ == "__main__":
    main()
