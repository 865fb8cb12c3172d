"""Scenario runner, seed-batch suites, oracle verification and plot data.

Run directory layout (one per scenario and seed)::

    <out>/<scenario>/seed_<seed>/metrics.csv       bucketed MetricsRecord rows
                                 meta.json         resolved parameters, timings
                                 final_state.txt   canonical state dump
                                 final_record.json full-precision final snapshot
                                 events.csv        per-tick log (optional)
                                 injections.csv    injection events (optional)
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import random
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .control import HIGH, LOW, ControlPolicy, control_step
from .dynamics import tick
from .metrics import (MetricsRecord, TimeBucket, buckets_from_boundaries, default_buckets,
                      snapshot_metrics)
from .model import ConfigError, SimParams, setup
from .statedump import dumps, read_dump

log = logging.getLogger(__name__)

RNG_NAME = "python-random-MT19937"
CSV_HEADER = ["scenario", "seed", "bucket_start", "bucket_end", "dyn_avg_degree",
              "clustering", "assortativity", "ak", "kd"]
METRICS = CSV_HEADER[4:]


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    params: SimParams = field(default_factory=SimParams)
    policy: ControlPolicy = field(default_factory=ControlPolicy)
    buckets: tuple[TimeBucket, ...] = ()
    seed: int = 0
    clustering: str = "average"

    def resolved_buckets(self) -> tuple[TimeBucket, ...]:
        return self.buckets or tuple(default_buckets(self.params.max_ticks))

    def validate(self) -> "ScenarioConfig":
        self.params.validate()
        self.policy.validate()
        if self.clustering not in ("average", "global"):
            raise ConfigError("clustering must be average|global")
        bs = self.resolved_buckets()
        if self.params.max_ticks > 0:
            if not bs or bs[0].start != 0 or bs[-1].end != self.params.max_ticks:
                raise ConfigError("bucket schedule must cover [0, max_ticks)")
            if any(a.end != b.start for a, b in zip(bs, bs[1:])):
                raise ConfigError("buckets must be contiguous and nonoverlapping")
        return self

    def describe(self) -> dict:
        return {
            "name": self.name,
            "seed": self.seed,
            "params": self.params.as_dict(),
            "policy": asdict(self.policy),
            "buckets": [[b.start, b.end] for b in self.resolved_buckets()],
            "clustering": self.clustering,
        }


@dataclass
class RunResult:
    scenario: str
    seed: int
    records: list[MetricsRecord]
    metadata: dict
    injection_events: int = 0
    dump_path: str | None = None
    error: str | None = None

    @property
    def final(self) -> MetricsRecord:
        return self.records[-1]


# --- config files -----------------------------------------------------------

_PARAM_KEYS = {
    "n_agents": int, "n_topics": int, "max_setup_topics": int, "max_ticks": int,
    "gamma": float, "rho": float, "theta": float, "alpha": float, "beta": float,
    "interest_budget": float, "skill_max": float,
}
_POLICY_KEYS = {
    "selection": str, "driver_fraction": float, "topic_rate": float,
    "injection_interval": int, "injected_skill": float, "reselect": str,
}


def _build(name: str, values: dict[str, str], where: str) -> ScenarioConfig:
    params, policy = {}, {}
    buckets: tuple[TimeBucket, ...] = ()
    seed, clustering = 0, "average"
    for key, raw in values.items():
        try:
            if key in _PARAM_KEYS:
                params[key] = _PARAM_KEYS[key](raw)
            elif key in _POLICY_KEYS:
                v = raw.lower() if key in ("selection", "reselect") else _POLICY_KEYS[key](raw)
                if key == "reselect":
                    if v not in ("true", "false"):
                        raise ValueError(raw)
                    v = v == "true"
                policy["interval" if key == "injection_interval" else key] = v
            elif key == "buckets":
                bounds = [int(x) for x in raw.split(";") if x.strip()]
                buckets = tuple(buckets_from_boundaries(bounds))
            elif key == "seed":
                seed = int(raw)
            elif key == "clustering":
                clustering = raw
            elif key == "name":
                name = raw
            else:
                raise ConfigError(f"{where}: unknown key {key!r}")
        except ValueError as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"{where}: bad value for {key}: {raw!r}") from None
    cfg = ScenarioConfig(name, SimParams(**params), ControlPolicy(**policy), buckets, seed,
                         clustering)
    return cfg.validate()


def parse_config(text: str, default_name: str = "scenario") -> list[ScenarioConfig]:
    """Parse ``key = value`` lines; ``[name]`` sections define extra scenarios.

    Keys before the first section are shared defaults. Without sections the
    file describes a single scenario.
    """
    shared: dict[str, str] = {}
    sections: list[tuple[str, dict[str, str]]] = []
    current = shared
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = {}
            sections.append((line[1:-1].strip(), current))
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        current[key] = value
    if not sections:
        return [_build(default_name, shared, default_name)]
    configs = [_build(name, {**shared, **vals}, f"[{name}]") for name, vals in sections]
    names = [c.name for c in configs]
    if len(set(names)) != len(names):
        raise ConfigError("scenario names must be unique")
    return configs


def load_config(path: str | Path) -> list[ScenarioConfig]:
    path = Path(path)
    return parse_config(path.read_text(), path.stem)


def standard_grid(sizes: Iterable[int] = (100, 200, 500, 1000), max_ticks: int = 100_000,
               **param_overrides) -> list[ScenarioConfig]:
    """C0 / HIGH 1% / HIGH 10% / LOW 50% / LOW 70% for every network size."""
    policies = {
        "C0": ControlPolicy(),
        "HIGH1": ControlPolicy(HIGH, 0.01),
        "HIGH10": ControlPolicy(HIGH, 0.10),
        "LOW50": ControlPolicy(LOW, 0.50),
        "LOW70": ControlPolicy(LOW, 0.70),
    }
    out = []
    for n in sizes:
        params = SimParams(n_agents=n, max_ticks=max_ticks, **param_overrides)
        for label, pol in policies.items():
            out.append(ScenarioConfig(f"N{n}_{label}", params, pol).validate())
    return out


# --- single run -------------------------------------------------------------

def _fmt(x: float | None) -> str:
    return "NA" if x is None else f"{x:.6f}"


def metrics_csv(result: RunResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in result.records:
        w.writerow([result.scenario, result.seed, r.bucket.start, r.bucket.end,
                    _fmt(r.dyn_avg_degree), _fmt(r.clustering), _fmt(r.assortativity),
                    _fmt(r.ak), _fmt(r.kd)])
    return buf.getvalue()


def run_dir(out: str | Path, scenario: str, seed: int) -> Path:
    return Path(out) / scenario / f"seed_{seed}"


def run_scenario(config: ScenarioConfig, out: str | Path | None = None,
                 event_log: bool = False, observer=None) -> RunResult:
    """Execute one scenario for ``config.seed``.

    Injection events fire before the tick whose index is a positive multiple
    of the interval; each bucket is closed with a snapshot once its last tick
    has run. ``observer(pop, records)`` is called after every snapshot.
    """
    config.validate()
    params, policy = config.params, config.policy
    buckets = config.resolved_buckets()
    t0 = time.perf_counter()

    rng = random.Random(config.seed)
    pop = setup(params, rng)
    activity: list[tuple[int, int, int]] = []
    records: list[MetricsRecord] = []
    events: list = []
    injections: list = []
    frozen: list[int] | None = None
    interval = policy.interval if policy.active else 0
    bi = 0

    for k in range(params.max_ticks):
        if interval and k and k % interval == 0:
            rep = control_step(pop, policy, rng, None if policy.reselect else frozen)
            if not policy.reselect and frozen is None:
                frozen = rep.drivers
            injections.append(rep)
        o = tick(pop, rng)
        if o.responder is not None:
            activity.append((k, o.requester, o.responder))
        if event_log:
            events.append(o)
        if pop.tick == buckets[bi].end:
            records.append(snapshot_metrics(pop, activity, buckets[bi], config.clustering))
            if observer is not None:
                observer(pop, records)
            activity = []
            bi += 1

    wall = time.perf_counter() - t0
    meta = config.describe() | {
        "code_version": __version__,
        "rng": RNG_NAME,
        "wall_time_s": round(wall, 3),
        "injection_events": len(injections),
        "final_tick": pop.tick,
    }
    result = RunResult(config.name, config.seed, records, meta, len(injections))
    log.info("%s seed=%d done in %.1fs", config.name, config.seed, wall)

    if out is not None:
        d = run_dir(out, config.name, config.seed)
        d.mkdir(parents=True, exist_ok=True)
        (d / "metrics.csv").write_text(metrics_csv(result))
        (d / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        (d / "final_state.txt").write_text(dumps(pop))
        result.dump_path = str(d / "final_state.txt")
        if records:
            last = records[-1]
            final = {
                "n_topics": params.n_topics,
                "tick": pop.tick,
                "ak": last.ak,
                "kd": last.kd,
                "clustering": last.clustering,
                "clustering_variant": config.clustering,
                "assortativity": last.assortativity,
                "degrees": [len(pop.neighbors(i)) for i in range(params.n_agents)],
            }
            (d / "final_record.json").write_text(json.dumps(final) + "\n")
        if event_log:
            _write_event_logs(d, events, injections)
    return result


def _write_event_logs(d: Path, events, injections) -> None:
    with open(d / "events.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["tick", "requester", "topic", "result", "responder", "delta_skill",
                    "new_edge"])
        for o in events:
            w.writerow([o.tick, o.requester, o.topic, o.result,
                        "" if o.responder is None else o.responder,
                        f"{o.delta_skill:.9f}", int(o.new_edge)])
    with open(d / "injections.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["tick", "agent", "injected_count", "topics"])
        for rep in injections:
            for i in rep.drivers:
                w.writerow([rep.tick, i, rep.counts[i], ";".join(map(str, rep.topics[i]))])


# --- suites -----------------------------------------------------------------

def parse_seeds(spec: str) -> range:
    """``A..B`` (inclusive) or a single integer."""
    try:
        if ".." in spec:
            a, b = spec.split("..", 1)
            seeds = range(int(a), int(b) + 1)
        else:
            seeds = range(int(spec), int(spec) + 1)
    except ValueError:
        raise ConfigError(f"bad seed range {spec!r}; expected A..B") from None
    if not seeds:
        raise ConfigError(f"empty seed range {spec!r}")
    return seeds


def _run_one(args) -> RunResult:
    config, out, event_log, observer = args
    try:
        return run_scenario(config, out, event_log, observer)
    except Exception as e:  # a failed run must not sink the suite
        log.exception("run %s seed=%d failed", config.name, config.seed)
        return RunResult(config.name, config.seed, [], config.describe(),
                         error=f"{type(e).__name__}: {e}")


@dataclass
class SuiteSummary:
    results: list[RunResult]
    aggregate: list[dict]

    @property
    def failures(self) -> list[RunResult]:
        return [r for r in self.results if r.error]

    def by_scenario(self) -> dict[str, list[RunResult]]:
        out: dict[str, list[RunResult]] = {}
        for r in self.results:
            if not r.error:
                out.setdefault(r.scenario, []).append(r)
        return out


def aggregate(results: Sequence[RunResult]) -> list[dict]:
    """Median / min / max of every metric per scenario and bucket."""
    groups: dict[tuple[str, int, int], dict[str, list[float]]] = {}
    for r in sorted((r for r in results if not r.error), key=lambda r: (r.scenario, r.seed)):
        for rec in r.records:
            g = groups.setdefault((r.scenario, rec.bucket.start, rec.bucket.end),
                                  {m: [] for m in METRICS})
            for m in METRICS:
                v = getattr(rec, m)
                if v is not None:
                    g[m].append(v)
    rows = []
    for (scenario, a, b), vals in sorted(groups.items()):
        row = {"scenario": scenario, "bucket_start": a, "bucket_end": b}
        for m in METRICS:
            xs = vals[m]
            row[f"{m}_median"] = statistics.median(xs) if xs else None
            row[f"{m}_min"] = min(xs) if xs else None
            row[f"{m}_max"] = max(xs) if xs else None
        rows.append(row)
    return rows


def aggregate_csv(rows: list[dict]) -> str:
    cols = ["scenario", "bucket_start", "bucket_end"] + [
        f"{m}_{s}" for m in METRICS for s in ("median", "min", "max")]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([row[c] if c in ("scenario", "bucket_start", "bucket_end") else _fmt(row[c])
                    for c in cols])
    return buf.getvalue()


def run_suite(configs: Sequence[ScenarioConfig], seeds: Iterable[int], jobs: int = 1,
              out: str | Path | None = None, event_log: bool = False,
              observer=None) -> SuiteSummary:
    """Run every (config, seed) pair; failed runs are recorded, not raised.

    ``observer`` must be a module-level function when ``jobs > 1``.
    """
    seeds = list(seeds)
    if not configs:
        raise ConfigError("suite needs at least one scenario")
    if not seeds:
        raise ConfigError("suite needs at least one seed")
    names = [c.name for c in configs]
    if len(set(names)) != len(names):
        raise ConfigError("scenario names must be unique within a suite")
    for c in configs:
        c.validate()
    tasks = [(replace(c, seed=s), out, event_log, observer) for c in configs for s in seeds]
    if jobs <= 1:
        results = [_run_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_run_one, tasks))
    results.sort(key=lambda r: (r.scenario, r.seed))
    rows = aggregate(results)
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "aggregate.csv").write_text(aggregate_csv(rows))
        with open(out / "failures.csv", "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["scenario", "seed", "error"])
            for r in results:
                if r.error:
                    w.writerow([r.scenario, r.seed, r.error])
    return SuiteSummary(results, rows)


# --- oracle -----------------------------------------------------------------

def oracle_metrics(dump_path: str | Path, clustering: str = "average") -> dict:
    """Recompute snapshot metrics from a state dump, independently of the run.

    Uses networkx for the graph metrics so the check does not share code with
    ``kdcontrol.metrics``.
    """
    import networkx as nx

    state = read_dump(dump_path)
    g = nx.Graph()
    g.add_nodes_from(range(state.n_agents))
    for i, peers in enumerate(state.friends):
        g.add_edges_from((i, j) for j in peers)
    skills = [s for entries in state.topics for _, _, s in entries]
    held = sum(len(e) for e in state.topics)
    if clustering == "global":
        cc = nx.transitivity(g)
    else:
        cc = nx.average_clustering(g) if state.n_agents else 0.0
    assort = None
    if g.number_of_edges():
        with_nan = nx.degree_assortativity_coefficient(g)
        if not math.isnan(with_nan):
            assort = float(with_nan)
    return {
        "ak": math.fsum(skills) / held,
        "kd": math.fsum(skills) / (state.n_agents * state.n_topics),
        "clustering": cc,
        "assortativity": assort,
        "degrees": [d for _, d in sorted(g.degree())],
    }


def verify_oracle(dump_path: str | Path, record_path: str | Path | None = None) -> dict:
    """Compare the run's final snapshot with an oracle recomputation.

    ``record_path`` defaults to ``final_record.json`` next to the dump.
    """
    dump_path = Path(dump_path)
    record_path = Path(record_path) if record_path else dump_path.with_name("final_record.json")
    record = json.loads(record_path.read_text())
    oracle = oracle_metrics(dump_path, record.get("clustering_variant", "average"))
    dev: dict[str, float] = {}
    for key in ("ak", "kd", "clustering"):
        dev[key] = abs(oracle[key] - record[key])
    a, b = oracle["assortativity"], record["assortativity"]
    if a is None or b is None:
        # Near-zero variance can flip definedness; treat a one-sided sentinel as a mismatch.
        dev["assortativity"] = 0.0 if a is None and b is None else math.inf
    else:
        dev["assortativity"] = abs(a - b)
    if len(oracle["degrees"]) != len(record["degrees"]):
        dev["degrees"] = math.inf
    else:
        dev["degrees"] = float(max((abs(x - y) for x, y in
                                    zip(oracle["degrees"], record["degrees"])), default=0))
    return {"oracle": oracle | {"degrees": None}, "record": record | {"degrees": None},
            "deviation": dev, "max_deviation": max(dev.values())}


# --- plot data --------------------------------------------------------------

def plotdata(out: str | Path) -> list[Path]:
    """Long-format per-scenario CSVs from every ``metrics.csv`` under ``out``."""
    out = Path(out)
    rows: dict[str, list[list[str]]] = {}
    for path in sorted(out.glob("*/seed_*/metrics.csv")):
        with open(path, newline="") as f:
            for rec in csv.DictReader(f):
                for m in METRICS:
                    rows.setdefault(rec["scenario"], []).append(
                        [rec["scenario"], rec["seed"], rec["bucket_start"], rec["bucket_end"],
                         m, rec[m]])
    target = out / "plotdata"
    target.mkdir(parents=True, exist_ok=True)
    written = []
    for scenario, rs in sorted(rows.items()):
        rs.sort(key=lambda r: (int(r[1]), int(r[2]), METRICS.index(r[4])))
        p = target / f"{scenario}.csv"
        with open(p, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["scenario", "seed", "bucket_start", "bucket_end", "metric", "value"])
            w.writerows(rs)
        written.append(p)
    return written
