"""Throughput comparison of the compiled and pure-numpy stepping kernels.

Run directly:  python benchmarks/bench_kernels.py [n_nodes] [n_steps]

Both backends advance the same logistic problem; the script reports
steps/second for each and the max discrepancy between final states.
"""

from __future__ import annotations

import sys
import time

import numpy as np

from kpplab.kernels import (HAVE_NUMBA, step_once_numba, step_once_numpy)
from kpplab.reactions import KERNEL_LOGISTIC


def build_problem(n):
    dz = 0.05
    z = np.linspace(-0.5 * n * dz, 0.5 * n * dz, n)
    u = 1.0 / (1.0 + np.exp(np.clip(z, -50, 50)))
    inv = 1.0 / (dz * dz)
    lo = np.full(n, inv)
    di = np.full(n, -2.0 * inv)
    up = np.full(n, inv)
    c = 2.5
    lo -= c / (2 * dz)
    up += c / (2 * dz)
    fixed_mask = np.zeros(n, dtype=np.bool_)
    fixed_mask[0] = fixed_mask[-1] = True
    fixed_val = np.where(fixed_mask, u, 0.0)
    params = np.array([1.0, 0.0, 0.0])
    empty = np.zeros(2)
    src = np.zeros(n)
    dt = 0.2 * dz * dz
    return (u, lo, di, up, dt, fixed_mask, fixed_val, KERNEL_LOGISTIC,
            params, empty, empty, src)


def run(stepper, args, n_steps):
    u = args[0].copy()
    rest = args[1:]
    stepper(u, *rest)  # warm-up (jit compile on the compiled path)
    u = args[0].copy()
    t0 = time.perf_counter()
    for _ in range(n_steps):
        u = stepper(u, *rest)
    return u, time.perf_counter() - t0


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 4001
    n_steps = int(sys.argv[2]) if len(sys.argv) > 2 else 2000
    args = build_problem(n)
    u_np, t_np = run(step_once_numpy, args, n_steps)
    print(f"numpy : {n_steps / t_np:10.0f} steps/s  ({t_np:.3f}s, "
          f"{n} nodes)")
    if not HAVE_NUMBA:
        print("numba : unavailable in this environment")
        return
    u_nb, t_nb = run(step_once_numba, args, n_steps)
    print(f"numba : {n_steps / t_nb:10.0f} steps/s  ({t_nb:.3f}s, "
          f"{n} nodes)")
    print(f"speedup x{t_np / t_nb:.1f}, "
          f"max state discrepancy {np.max(np.abs(u_np - u_nb)):.3e}")


if __name__ == "__main__":
    main()
