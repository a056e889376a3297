"""Compare the numba and numpy Held-Karp kernels.

Run ``python3 benchmarks/bench_kernels.py``. Prints per-size timings of the
raw table kernel and of one exact solve per backend (each backend runs in a
subprocess so ``PICKLAB_KERNELS`` takes effect at import).
"""
from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from picklab._accel import HAS_NUMBA
from picklab.kernels import _hk_table_numba, _hk_table_numpy

SOLVE_SNIPPET = """
import time
from picklab.instance import generate_setting
from picklab.ciopt import solve_ciopt
t = time.perf_counter()
total = 0
for seed in range({seeds}):
    total += solve_ciopt(generate_setting("Base", {n}, seed, "robot"), "robot").objective
print(f"{{time.perf_counter() - t:.3f}} {{total}}")
"""


def random_case(m: int, rng: np.random.Generator):
    pts = rng.integers(0, 100, size=(m, 2))
    dist = np.abs(pts[:, None, :] - pts[None, :, :]).sum(axis=2).astype(np.int64)
    arr0 = rng.integers(0, 50, size=m).astype(np.int64)
    rel = rng.integers(0, 300, size=m).astype(np.int64)
    return arr0, dist, rel


def best_of(fn, args, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[6, 8, 10, 12, 14])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--solve-n", type=int, default=8)
    ap.add_argument("--solve-seeds", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"numba available: {HAS_NUMBA}")
    print(f"{'items':>5} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8}")
    for m in args.sizes:
        arr0, dist, rel = random_case(m, rng)
        a = _hk_table_numba(arr0, dist, rel, 40)      # also triggers compilation
        b = _hk_table_numpy(arr0, dist, rel, 40)
        assert np.array_equal(a, b), "backends disagree"
        tn = best_of(_hk_table_numba, (arr0, dist, rel, 40), args.repeat)
        tp = best_of(_hk_table_numpy, (arr0, dist, rel, 40), args.repeat)
        print(f"{m:>5} {tn * 1e3:>10.3f} {tp * 1e3:>10.3f} {tp / tn:>8.1f}")
    code = SOLVE_SNIPPET.format(n=args.solve_n, seeds=args.solve_seeds)
    print(f"\nexact robot solves, Base n={args.solve_n}, {args.solve_seeds} seeds (incl. import and jit)")
    for backend in ("numba", "numpy"):
        env = dict(os.environ, PICKLAB_KERNELS=backend)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        secs, total = out.stdout.split()
        print(f"{backend:>6}: {float(secs):.3f} s (objective sum {total})")


if __name__ == "__main__":
    main()
