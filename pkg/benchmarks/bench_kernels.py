"""Compiled core vs numpy fallback, kernel by kernel and per full backend step.

    python benchmarks/bench_kernels.py --width 1024 --height 514 --repeats 5
"""

import argparse
import statistics
import time

import numpy as np

from fhp import kernels
from fhp.backends import make_tile_plan
from fhp.collision import build_table
from fhp.config import SimConfig
from fhp.lattice import init_lattice
from fhp.rng import threshold


def timed(fn, repeats):
    fn()
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def kernel_cases(impl, lat, table, args):
    h = lat.height
    regions = make_tile_plan(lat.width, h, args.tile_x, args.tile_y).write_regions()
    thr = threshold(0.01)
    dst = lat.dst
    return {
        "motion_pull": lambda: impl.motion_pull(lat.src, dst, lat.geometry, 0, h),
        f"motion_lanes[{args.lanes}]": lambda: impl.motion_lanes(lat.src, dst, lat.geometry, args.lanes),
        f"motion_tiles[{args.tile_x}x{args.tile_y}]": lambda: impl.motion_tiles(lat.src, dst, lat.geometry, regions),
        "collide": lambda: impl.collide(dst, table.entries, 1, 0, thr, 1, lat.width + 1, 0, h),
        "collide_tiles": lambda: impl.collide_tiles(dst, table.entries, 1, 0, thr, regions),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--width", type=int, default=1024)
    ap.add_argument("--height", type=int, default=514)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--lanes", type=int, default=32, choices=(16, 32, 64))
    ap.add_argument("--tile-x", type=int, default=64)
    ap.add_argument("--tile-y", type=int, default=16)
    args = ap.parse_args()

    impls = kernels.available()
    if "cython" not in impls:
        print("compiled core not built; only the fallback will be timed")
    table = build_table()
    lat = init_lattice(SimConfig(width=args.width, height=args.height, fill_density=0.3, seed=1))
    nodes = args.width * args.height

    results = {}
    for name, impl in impls.items():
        for case, fn in kernel_cases(impl, lat, table, args).items():
            results[case, name] = nodes / timed(fn, args.repeats) / 1e6

    cases = list(kernel_cases(impls["python"], lat, table, args))
    print(f"lattice {args.width}x{args.height}, Mups per kernel call (median of {args.repeats})")
    header = f"{'kernel':<24}" + "".join(f"{n:>12}" for n in impls) + ("  speedup" if len(impls) > 1 else "")
    print(header)
    for case in cases:
        row = f"{case:<24}" + "".join(f"{results[case, n]:12.1f}" for n in impls)
        if "cython" in impls:
            row += f"  {results[case, 'cython'] / results[case, 'python']:7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
