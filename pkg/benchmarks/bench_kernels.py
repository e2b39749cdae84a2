"""Time the hot kernels with numba and with the pure-numpy fallback.

Each backend runs in its own interpreter because the backend is chosen at
import time from VRPBENCH_DISABLE_NUMBA.

    python3 benchmarks/bench_kernels.py [--n 1000] [--moves 200000]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
import numpy as np
from vrpbench import _accel
from vrpbench.generators import GeneratorConfig, generate
from vrpbench.solver import savings_construct, sa_improve, warmup
from vrpbench import kernels

n, moves = int(sys.argv[1]), int(sys.argv[2])
warmup()
inst = generate(GeneratorConfig(n, seed=1))
out = {"backend": _accel.backend_name()}

def best_of(fn, repeat=3):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)

out["distance_matrix_s"] = best_of(lambda: kernels.distance_matrix(inst.coords, False))
_ = inst.distances
out["savings_s"] = best_of(lambda: savings_construct(inst))
start = savings_construct(inst)
t = time.perf_counter()
traj = sa_improve(inst, start, 1e9, 0, max_moves=moves)
out["sa_s"] = time.perf_counter() - t
out["sa_moves_per_s"] = traj.meta["moves"] / out["sa_s"]
out["sa_final_cost"] = traj.final_cost
print(json.dumps(out))
"""


def run_backend(disable: bool, n: int, moves: int) -> dict:
    env = dict(os.environ)
    env["VRPBENCH_DISABLE_NUMBA"] = "1" if disable else "0"
    proc = subprocess.run([sys.executable, "-c", WORKER, str(n), str(moves)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=1000)
    parser.add_argument("--moves", type=int, default=200_000)
    args = parser.parse_args(argv)

    t = time.perf_counter()
    rows = [run_backend(False, args.n, args.moves), run_backend(True, args.n, args.moves)]
    print(f"n={args.n} moves={args.moves}")
    print(f"{'backend':8} {'dist ms':>9} {'savings ms':>11} {'SA moves/s':>12} {'final cost':>12}")
    for r in rows:
        print(f"{r['backend']:8} {1e3 * r['distance_matrix_s']:9.2f} {1e3 * r['savings_s']:11.2f} "
              f"{r['sa_moves_per_s']:12.0f} {r['sa_final_cost']:12.6f}")
    same = rows[0]["sa_final_cost"] == rows[1]["sa_final_cost"]
    print(f"identical SA result across backends: {same}")
    print(f"speed-up (SA): {rows[0]['sa_moves_per_s'] / rows[1]['sa_moves_per_s']:.1f}x")
    print(f"total {time.perf_counter() - t:.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
