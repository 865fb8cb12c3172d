"""Run the 20-scenario grid over a seed range and write aggregate + plot data.

    python3 scripts/run_grid.py --seeds 1..20 --jobs 4 --out runs/grid
"""

import argparse
import logging
import time

from kdcontrol.experiment import standard_grid, parse_seeds, plotdata, run_suite
from kdcontrol.invariants import check_bucket


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", default="1..20")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--ticks", type=int, default=100_000)
    ap.add_argument("--sizes", default="100,200,500,1000")
    ap.add_argument("--out", default="runs/grid")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    configs = standard_grid(tuple(int(s) for s in args.sizes.split(",")), args.ticks)
    t0 = time.perf_counter()
    summary = run_suite(configs, parse_seeds(args.seeds), args.jobs, args.out,
                        observer=check_bucket)
    print(f"{len(summary.results)} runs in {time.perf_counter() - t0:.0f}s, "
          f"{len(summary.failures)} failures")
    for path in plotdata(args.out):
        print(path)


if __name__ == "__main__":
    main()
