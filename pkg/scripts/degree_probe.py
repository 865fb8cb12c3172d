"""Compare late-period dynamic degree of control variants against the benchmark.

Prints, per variant, the median over seeds of the mean dynamic average degree
across the last four time buckets, and the relative change versus C0.
"""

import argparse
import statistics
from dataclasses import replace

from kdcontrol.control import HIGH, LOW, ControlPolicy
from kdcontrol.experiment import ScenarioConfig, run_scenario
from kdcontrol.model import SimParams

VARIANTS = {
    "C0": ControlPolicy(),
    "HIGH1": ControlPolicy(HIGH, 0.01),
    "HIGH10": ControlPolicy(HIGH, 0.10),
    "HIGH10_skill50": ControlPolicy(HIGH, 0.10, injected_skill=50.0),
    "HIGH10_frozen": ControlPolicy(HIGH, 0.10, reselect=False),
    "LOW50": ControlPolicy(LOW, 0.50),
}


def late_degree(records):
    return statistics.fmean(r.dyn_avg_degree for r in records[-4:])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-n", type=int, default=500)
    ap.add_argument("--seeds", type=int, default=4)
    ap.add_argument("--ticks", type=int, default=100_000)
    ap.add_argument("--set", nargs="*", default=[], metavar="KEY=VALUE",
                    help="override model constants, e.g. gamma=4 rho=2")
    args = ap.parse_args()
    overrides = {k: float(v) for k, v in (kv.split("=") for kv in args.set)}
    params = replace(SimParams(n_agents=args.n, max_ticks=args.ticks), **overrides)

    base = None
    for name, policy in VARIANTS.items():
        vals = [late_degree(run_scenario(ScenarioConfig(name, params, policy, seed=s)).records)
                for s in range(1, args.seeds + 1)]
        med = statistics.median(vals)
        base = med if base is None else base
        print(f"{name:16s} median late degree {med:7.3f}  vs C0 {med / base - 1:+.1%}")


if __name__ == "__main__":
    main()
