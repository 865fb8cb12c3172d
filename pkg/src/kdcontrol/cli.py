"""Command line entry point: ``simulate``, ``suite``, ``verify``, ``plotdata``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

from .experiment import (load_config, standard_grid, parse_seeds, plotdata, run_scenario,
                         run_suite, verify_oracle)
from .model import ConfigError
from .statedump import DumpParseError


def _configs(args):
    if args.grid:
        return standard_grid()
    if not args.config:
        raise ConfigError("either --config or --grid is required")
    return load_config(args.config)


def cmd_simulate(args) -> int:
    configs = _configs(args)
    for cfg in configs:
        res = run_scenario(replace(cfg, seed=args.seed), args.out, args.event_log)
        last = res.final
        print(f"{res.scenario} seed={res.seed} ak={last.ak:.4f} kd={last.kd:.4f} "
              f"clustering={last.clustering:.4f} "
              f"wall={res.metadata['wall_time_s']}s -> {res.dump_path}")
    return 0


def cmd_suite(args) -> int:
    summary = run_suite(_configs(args), parse_seeds(args.seeds), args.jobs, args.out,
                        args.event_log)
    ok = len(summary.results) - len(summary.failures)
    print(f"{ok}/{len(summary.results)} runs ok, {len(summary.by_scenario())} scenarios; "
          f"aggregate written to {args.out}/aggregate.csv")
    for r in summary.failures:
        print(f"FAILED {r.scenario} seed={r.seed}: {r.error}", file=sys.stderr)
    return 1 if summary.failures else 0


def cmd_verify(args) -> int:
    report = verify_oracle(args.dump, args.record)
    for k, v in report["deviation"].items():
        print(f"{k:14s} deviation {v:.3e}")
    ok = report["max_deviation"] <= args.tol
    print(f"max deviation {report['max_deviation']:.3e} -> {'PASS' if ok else 'FAIL'}")
    if args.json:
        print(json.dumps(report, default=str))
    return 0 if ok else 1


def cmd_plotdata(args) -> int:
    for p in plotdata(args.out):
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kdcontrol", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario file for one seed")
    p.add_argument("--config")
    p.add_argument("--grid", action="store_true", help="use the built-in 20-scenario grid")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--event-log", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("suite", help="run scenarios over a seed range")
    p.add_argument("--config")
    p.add_argument("--grid", action="store_true", help="use the built-in 20-scenario grid")
    p.add_argument("--seeds", required=True, help="inclusive range A..B")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--event-log", action="store_true")
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("verify", help="recompute final metrics from a state dump")
    p.add_argument("--dump", required=True)
    p.add_argument("--record", help="final_record.json (default: next to the dump)")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plotdata", help="long-format CSVs from a suite output dir")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plotdata)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, DumpParseError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
