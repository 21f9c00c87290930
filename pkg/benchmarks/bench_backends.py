#!/usr/bin/env python3
"""Time the numba and pure-numpy kernel paths against each other.

Each backend runs in its own interpreter because the choice is made at
import time from HYBRID_SOR_NO_NUMBA.

Usage:
    python benchmarks/bench_backends.py [--dimension N] [--repeats R]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
import hybrid_sor
from hybrid_sor import SolverConfig, solve, sor_sweep
from hybrid_sor.problems import generate_problem, get_spec

n, repeats = int(sys.argv[1]), int(sys.argv[2])
system, _ = generate_problem(get_spec("P1", dimension=n))
x = np.random.default_rng(0).uniform(-30, 30, n)
sor_sweep(system, x, 1.0)  # compile / warm up

start = time.perf_counter()
for _ in range(repeats):
    x = sor_sweep(system, x, 0.6)
sweep = (time.perf_counter() - start) / repeats

config = SolverConfig.for_mode("tva", threshold_error=1e-12, max_generations=2000, seed=0)
solve(system, SolverConfig.for_mode("tva", max_generations=2, seed=0))
start = time.perf_counter()
result = solve(system, config)
run = time.perf_counter() - start
print(json.dumps({"backend": hybrid_sor.BACKEND, "sweep_s": sweep, "solve_s": run,
                  "status": result.status, "generations": result.generations_used}))
"""


def run_backend(disable_numba, n, repeats):
    env = dict(os.environ, HYBRID_SOR_NO_NUMBA="1" if disable_numba else "0")
    out = subprocess.run([sys.executable, "-c", WORKER, str(n), str(repeats)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dimension", type=int, default=100)
    parser.add_argument("--repeats", type=int, default=2000)
    args = parser.parse_args()

    rows = [run_backend(flag, args.dimension, args.repeats) for flag in (True, False)]
    print(f"P1, n={args.dimension}, TVA solve to 1e-12 (seed 0)")
    print(f"{'backend':>8} {'sweep [us]':>12} {'solve [s]':>10} {'status':>10} {'gens':>6}")
    for r in rows:
        print(f"{r['backend']:>8} {r['sweep_s'] * 1e6:12.1f} {r['solve_s']:10.3f} "
              f"{r['status']:>10} {r['generations']:6d}")
    if rows[1]["backend"] == "numba":
        print(f"speedup: sweep x{rows[0]['sweep_s'] / rows[1]['sweep_s']:.1f}, "
              f"solve x{rows[0]['solve_s'] / rows[1]['solve_s']:.1f}")
    else:
        print("numba unavailable; only the numpy path was measured")


if __name__ == "__main__":
    main()
