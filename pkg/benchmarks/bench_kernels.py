#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallbacks.

Covers the two hot paths: the CSV ingest row loop and the window/topic
counting pass. Run from the repo root:

    python benchmarks/bench_kernels.py [--rows N]
"""

from __future__ import annotations

import argparse
import csv
import io
import random
import time
from array import array

from sentidrift import _pykernels
from sentidrift.ingest import UNLABELED, Comment, normalize_timestamp
from sentidrift.scorer import _NAME_TO_LABEL
from sentidrift.synth import generate_rows, write_rows_csv

try:
    from sentidrift import _native
except ImportError:
    _native = None


def bench(fn, repeats=3):
    best = None
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best, result


def window_stats_inputs(n_rows: int, n_windows: int, n_topics: int, seed: int = 1):
    rng = random.Random(seed)
    scores = array("b", (rng.choice((-1, 0, 1)) for _ in range(n_rows)))
    topic_ids = array("i", (rng.randrange(n_topics) for _ in range(n_rows)))
    bounds = sorted(rng.sample(range(1, n_rows), n_windows - 1))
    starts = array("q", [0, *bounds, n_rows])
    return scores, topic_ids, n_topics, starts


def csv_text(n_rows: int, seed: int = 2) -> str:
    buf = io.StringIO()
    write_rows_csv(generate_rows(n_rows, seed=seed), buf)
    return buf.getvalue()


def run_csv_kernel(impl, text: str):
    reader = csv.reader(io.StringIO(text))
    next(reader)  # header
    return impl.load_csv_rows(
        reader, 0, 1, 2, 3, 4, 5, Comment, _NAME_TO_LABEL, UNLABELED, normalize_timestamp
    )


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=1_000_000)
    parser.add_argument("--windows", type=int, default=10_000)
    parser.add_argument("--topics", type=int, default=16)
    args = parser.parse_args()

    backends = [("python", _pykernels)]
    if _native is not None:
        backends.append(("native", _native))
    else:
        print("note: compiled extension not available; benchmarking fallback only")

    print(f"== window_topic_stats ({args.rows:,} rows, {args.windows:,} windows) ==")
    inputs = window_stats_inputs(args.rows, args.windows, args.topics)
    results = {}
    for name, impl in backends:
        dt, out = bench(lambda impl=impl: impl.window_topic_stats(*inputs))
        results[name] = (dt, out)
        print(f"  {name:>7}: {dt:8.3f}s  ({args.rows / dt / 1e6:6.1f} Mrows/s)")
    _compare(results)

    print(f"== load_csv_rows ({args.rows:,} rows) ==")
    text = csv_text(args.rows)
    results = {}
    for name, impl in backends:
        dt, out = bench(lambda impl=impl: run_csv_kernel(impl, text), repeats=2)
        results[name] = (dt, (len(out[0]), out[2], out[3]))
        print(f"  {name:>7}: {dt:8.3f}s  ({args.rows / dt / 1e6:6.1f} Mrows/s)")
    _compare(results)
    return 0


def _compare(results) -> None:
    if "native" in results and "python" in results:
        dt_py, out_py = results["python"]
        dt_c, out_c = results["native"]
        agree = "outputs agree" if out_py == out_c else "OUTPUT MISMATCH"
        print(f"  speedup: {dt_py / dt_c:.2f}x  ({agree})")


if __name__ == "__main__":
    raise SystemExit(main())
