#!/usr/bin/env python3
"""Time the numba kernels against the pure-NumPy fallback.

Run twice to compare back ends:

    python benchmarks/bench_kernels.py
    HOLOGATE_DISABLE_NUMBA=1 python benchmarks/bench_kernels.py

The workloads mirror the two hot paths of the package: propagating the full
16-dimensional two-atom propagator across a long drive loop, and averaging a
batch of noisy single-atom trajectories.
"""

import time

import numpy as np

from hologate import kernels
from hologate.dynamics import schrodinger_evolve
from hologate.gates import pacman_loop, solve_beta_for_phase
from hologate.model import ModelConfig
from hologate.noise import NoiseProcessSpec, noisy_average_vs_master


def timeit(label, fn, repeat=3):
    fn()  # warm-up (numba compilation, caches)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    best = min(times)
    print(f"{label:<44s} {best * 1e3:9.1f} ms   [{kernels.backend()}]")
    return best


def main():
    print(f"kernel backend: {kernels.backend()}")
    omega = np.array([0.0, 1.0])
    cfg = ModelConfig(d=2, W=10.0, gamma=1e-4)
    sol = solve_beta_for_phase(5.0, np.pi, "alpha2")
    loop = pacman_loop(5.0, sol.beta, 74.0, 20.0, omega)

    timeit(
        "two-atom propagator, T=168, 16384 steps",
        lambda: schrodinger_evolve(cfg, loop, 16384, "two"),
    )

    cfg0 = ModelConfig(d=2, W=10.0, gamma=0.0)
    noisy_loop = pacman_loop(2.0, np.pi, 5.0, 5.0, omega)
    spec = NoiseProcessSpec(sigma2=1.0, tau_c=0.5, gamma=0.05, seed=1)
    timeit(
        "2000 noisy trajectories, 512 steps",
        lambda: noisy_average_vs_master(cfg0, noisy_loop, spec, 2000, 512, arity="one"),
        repeat=2,
    )


if __name__ == "__main__":
    main()
