"""Compare the compiled and pure-Python kernels on the pipeline hot paths.

    python3 benchmarks/bench_kernels.py [--n 7] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from snfilter import kernels
from snfilter.levels import all_levels, nonempty_levels
from snfilter.minrep import find_min_rep_perm
from snfilter.pipeline import compute_R, extend


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, default=7, help="channel count for the workload")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--pairs", type=int, default=2000, help="random pairs for the embedding test")
    args = ap.parse_args()

    backends = kernels.available()
    if "cython" not in backends:
        print("compiled backend not built; only the Python timings will be shown")

    n = args.n
    r2 = compute_R(n, 2)
    cands = extend(r2, all_levels(n))
    lo, hi, offs = nonempty_levels(n).packed
    rng = np.random.default_rng(0)
    picks = rng.integers(0, len(cands), size=(args.pairs, 2))
    words = [s.words for s in cands.sets]

    rows = []
    for name, mod in backends.items():
        t_apply = best_of(lambda: [mod.apply_levels(s.words, n, lo, hi, offs) for s in r2.records.sets], args.repeat)
        t_embed = best_of(lambda: [mod.find_embedding(words[a], words[b], n) for a, b in picks], args.repeat)
        t_reduce = best_of(lambda: find_min_rep_perm(cands, backend=name), args.repeat)
        rows.append((name, t_apply, t_embed, t_reduce))

    print(f"n={n}: {len(r2)} prefixes, {len(cands)} candidates, {args.pairs} embedding pairs")
    print(f"{'backend':8} {'apply_levels':>13} {'find_embedding':>15} {'reduction':>10}")
    for name, *ts in rows:
        print(f"{name:8} " + " ".join(f"{t:>{w}.4f}s" for t, w in zip(ts, (12, 14, 9))))
    if len(rows) == 2:
        fast, slow = (rows[0], rows[1]) if rows[0][0] == "cython" else (rows[1], rows[0])
        print("speedup  " + " ".join(f"{s / f:>{w}.1f}x" for s, f, w in zip(slow[1:], fast[1:], (12, 14, 9))))


if __name__ == "__main__":
    main()
