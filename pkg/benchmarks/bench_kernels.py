"""Timing comparison of the compiled counting kernels against the plain
Python fallback. Run directly:

    python3 benchmarks/bench_kernels.py

The script times the current process (compiled path unless the environment
disables it), then re-runs itself with TANDIM_DISABLE_NUMBA=1 and prints both
columns side by side."""

from __future__ import annotations

import json
import os
import subprocess
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from tandim import kernels  # noqa: E402

SEED = 20260823
REPEAT = 5


def _instances(rng, n_sets=40, nbits=48, count=30):
    """Random cover/packing instances over a fixed-size element universe."""
    cover = []
    pack = []
    universe = np.uint64((1 << nbits) - 1)
    for _ in range(count):
        masks = np.zeros(n_sets, dtype=np.uint64)
        for i in range(n_sets):
            bits = rng.choice(nbits, size=rng.integers(3, 9), replace=False)
            m = 0
            for b in bits:
                m |= 1 << int(b)
            masks[i] = m
        union = np.uint64(0)
        for m in masks:
            union |= m
        cover.append((masks, union))
        adj = np.zeros(n_sets, dtype=np.uint64)
        for i in range(n_sets):
            for j in range(i + 1, n_sets):
                if masks[i] & masks[j] and rng.random() < 0.6:
                    adj[i] |= np.uint64(1 << j)
                    adj[j] |= np.uint64(1 << i)
        pack.append((adj, n_sets))
    return cover, pack


def _time(fn, reps=REPEAT):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_column():
    rng = np.random.default_rng(SEED)
    cover, pack = _instances(rng)
    kernels.warmup()
    out = {"compiled": kernels.USE_NUMBA}

    def do_greedy():
        for masks, universe in cover:
            kernels.greedy_cover(masks, universe)

    def do_exact_cover():
        for masks, universe in cover:
            ub = kernels.greedy_cover(masks, universe)
            kernels.set_cover_exact(masks, universe, np.int64(ub),
                                    np.int64(200_000))

    def do_greedy_pack():
        for adj, n in pack:
            kernels.greedy_packing(adj, n)
            kernels.clique_cover(adj, n)

    def do_exact_pack():
        for adj, n in pack:
            lb = kernels.greedy_packing(adj, n)
            kernels.packing_exact(adj, n, np.int64(lb), np.int64(200_000))

    out["greedy_cover"] = _time(do_greedy)
    out["set_cover_exact"] = _time(do_exact_cover)
    out["greedy_packing"] = _time(do_greedy_pack)
    out["packing_exact"] = _time(do_exact_pack)
    return out


def main():
    if os.environ.get("_BENCH_CHILD"):
        print(json.dumps(run_column()))
        return
    here = run_column()
    env = dict(os.environ, _BENCH_CHILD="1", TANDIM_DISABLE_NUMBA="1")
    proc = subprocess.run([sys.executable, os.path.abspath(__file__)],
                          env=env, capture_output=True, text=True, check=True)
    other = json.loads(proc.stdout.strip().splitlines()[-1])
    compiled, fallback = (here, other) if here["compiled"] else (other, here)
    print(f"{'kernel':<18} {'compiled (s)':>14} {'fallback (s)':>14} {'speedup':>9}")
    for key in ("greedy_cover", "set_cover_exact", "greedy_packing",
                "packing_exact"):
        c, f = compiled[key], fallback[key]
        print(f"{key:<18} {c:>14.6f} {f:>14.6f} {f / c:>8.1f}x")


if __name__ == "__main__":
    main()
