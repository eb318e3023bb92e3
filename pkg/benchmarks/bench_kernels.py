"""Wall-clock comparison of the numba and numpy kernel backends.

Times the event simulator and the Euler integrator on random strict multiplex
networks and prints a CSV table (median of ``--reps`` runs, after one warm-up
run per backend so JIT compilation is excluded).

    python3 benchmarks/bench_kernels.py --sizes 100 1000 --events 200000
"""

import argparse
import statistics
import sys
import time

import numpy as np

from muxopinion import ModelParams, effective_matrix, integrate_ode, random_multiplex, simulate
from muxopinion._kernels import available_backends


def _median_seconds(fn, reps):
    fn()  # warm-up (JIT compile on the numba path)
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def run(sizes, events, ode_steps, reps, n_layers, seed):
    rows = []
    for n in sizes:
        net = random_multiplex(n, n_layers, 8, rng=seed, normalize="strict")
        rng = np.random.default_rng(seed)
        params = ModelParams(alpha=np.ones((n, n_layers)), lam=rng.uniform(0, 1, n))
        eff = effective_matrix(net, params)
        for backend in available_backends():
            sim = _median_seconds(lambda: simulate(net, params, events, seed=seed,
                                                   sample_every=events, backend=backend), reps)
            ode = _median_seconds(lambda: integrate_ode(eff, params.lam, t_end=ode_steps * 0.01,
                                                        dt=0.01, backend=backend), reps)
            rows.append((n, backend, "simulate", events, sim))
            rows.append((n, backend, "euler", ode_steps, ode))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 1000])
    ap.add_argument("--events", type=int, default=200_000)
    ap.add_argument("--ode-steps", type=int, default=2000)
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--layers", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rows = run(args.sizes, args.events, args.ode_steps, args.reps, args.layers, args.seed)
    out = sys.stdout
    out.write("size,backend,kernel,work,seconds,per_unit_us\n")
    for n, backend, kernel, work, sec in rows:
        out.write(f"{n},{backend},{kernel},{work},{sec:.6g},{1e6 * sec / work:.6g}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
