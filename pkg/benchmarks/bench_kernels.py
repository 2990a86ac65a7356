#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Runs every batch kernel on synthetic workloads of increasing size and
prints median wall times plus the numba speedup. The numba path is
warmed (and disk-cached) before timing so compilation is excluded.

Usage:
    python benchmarks/bench_kernels.py [--sizes 10000,100000,1000000] [--repeats 7]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from touchline import kernels


def _boxes(rng, n):
    xy = rng.uniform(0.0, 900.0, (n, 2))
    sides = rng.uniform(5.0, 300.0, (n, 2))
    return np.concatenate([xy, xy + sides], axis=1)


def _workload(rng, n) -> dict[str, tuple]:
    boxes_a = _boxes(rng, n)
    boxes_b = _boxes(rng, n)
    sources = rng.uniform(-100.0, 100.0, (n, 2))
    angles = rng.uniform(0.0, 2.0 * math.pi, n)
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    tips = sources + rng.uniform(20.0, 120.0, (n, 1)) * dirs
    centers = rng.uniform(-300.0, 300.0, (n, 2))
    skeletons = rng.uniform(-200.0, 200.0, (n, 12))
    return {
        "iou_batch": (boxes_a, boxes_b),
        "giou_batch": (boxes_a, boxes_b),
        "alignment_batch": (sources, tips, centers),
        "collinearity_batch": (skeletons,),
        "ray_box_batch": (sources, dirs, boxes_a),
        "point_ray_distance_batch": (centers, sources, dirs),
    }


def _median_time(fn, args, repeats: int) -> float:
    fn(*args)  # warmup (JIT compile / cache load)
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - start)
    return float(np.median(times))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="10000,100000,1000000")
    parser.add_argument("--repeats", type=int, default=7)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if "numba" not in kernels.IMPLEMENTATIONS:
        raise SystemExit("numba backend unavailable; nothing to compare")
    numpy_impl = kernels.IMPLEMENTATIONS["numpy"]
    numba_impl = kernels.IMPLEMENTATIONS["numba"]

    print(f"{'kernel':<26} {'n':>9} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    print("-" * 68)
    for n in sizes:
        rng = np.random.default_rng(args.seed)
        workload = _workload(rng, n)
        for name, call_args in workload.items():
            t_np = _median_time(numpy_impl[name], call_args, args.repeats)
            t_nb = _median_time(numba_impl[name], call_args, args.repeats)
            print(
                f"{name:<26} {n:>9} {t_np * 1e3:>10.2f} {t_nb * 1e3:>10.2f} "
                f"{t_np / t_nb:>7.1f}x"
            )
        print("-" * 68)


if __name__ == "__main__":
    main()
