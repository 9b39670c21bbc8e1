"""Compare the compiled kernel backend against the pure-numpy fallback.

Runs each hot kernel under both backends and prints a timing table, then
times a short end-to-end noisy simulation under each backend by re-executing
itself with ZNL_PURE_PY=1.

Usage: python3 benchmarks/bench_kernels.py [--inner]
"""
import os
import subprocess
import sys
import time

import numpy as np


def _time(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels():
    from znl import kernel_backend
    from znl._kernels import abs2, gbm_path, holder_sup, phase_apply

    rng = np.random.default_rng(0)
    rows = []

    n = 4000
    values = rng.standard_normal(n)
    times = np.cumsum(rng.uniform(1e-4, 1e-3, n))
    rows.append(("holder_sup (n=4000)", _time(holder_sup, values, times, 0.45, repeat=3)))

    u = rng.standard_normal(512 * 512) + 1j * rng.standard_normal(512 * 512)
    pot = rng.standard_normal(512 * 512)
    rows.append(("phase_apply (512^2)", _time(phase_apply, u, pot, 0.01)))
    rows.append(("abs2 (512^2)", _time(abs2, u)))

    dw = rng.standard_normal(100_000) * 0.01
    dts = np.full(100_000, 1e-4)
    rows.append(("gbm_path (1e5 steps)", _time(gbm_path, dw, 1.0, dts)))

    print(f"backend: {kernel_backend}")
    for name, t in rows:
        print(f"  {name:24s} {t * 1e3:9.3f} ms")
    return kernel_backend


def bench_simulation():
    from znl.experiments import focusing_scenario, run_one_path

    scen = focusing_scenario(n=64, dt=0.01, t_max=4.0)
    t0 = time.perf_counter()
    run_one_path(scen, 4.0, seed=1)
    print(f"  one noisy trajectory     {time.perf_counter() - t0:9.3f} s")


def main():
    backend = bench_kernels()
    bench_simulation()
    if "--inner" not in sys.argv and backend != "numpy":
        print()
        sys.stdout.flush()
        env = dict(os.environ, ZNL_PURE_PY="1")
        subprocess.run([sys.executable, __file__, "--inner"], env=env, check=True)


if __name__ == "__main__":
    main()
