"""Network and diffusion metrics over population snapshots and activity logs.

Structural metrics work on the undirected, unweighted projection of the
friend graph (an edge exists if either direction exists).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import Population, StateError

# Reference time periods for the dynamic average degree.
PERIOD_BOUNDARIES = (0, 100, 5000, 10_000, 20_000, 40_000, 60_000, 80_000, 100_000)


@dataclass(frozen=True, order=True)
class TimeBucket:
    start: int
    end: int

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"empty bucket [{self.start}, {self.end})")

    def __contains__(self, tick: int) -> bool:
        return self.start <= tick < self.end


def buckets_from_boundaries(bounds: Sequence[int]) -> list[TimeBucket]:
    return [TimeBucket(a, b) for a, b in zip(bounds, bounds[1:])]


def default_buckets(max_ticks: int) -> list[TimeBucket]:
    """The eight reference periods for K = 100000, else eight uniform buckets."""
    if max_ticks == PERIOD_BOUNDARIES[-1]:
        return buckets_from_boundaries(PERIOD_BOUNDARIES)
    n = min(8, max_ticks)
    bounds = sorted({round(max_ticks * k / n) for k in range(n + 1)})
    return buckets_from_boundaries(bounds)


@dataclass(frozen=True)
class MetricsRecord:
    bucket: TimeBucket
    dyn_avg_degree: float
    clustering: float
    assortativity: float | None  # None when undefined (zero degree variance)
    ak: float
    kd: float

    @property
    def gap(self) -> float:
        return self.ak - self.kd


def _skill_mass(pop: Population) -> tuple[float, int]:
    mass = math.fsum(s for a in pop.agents for s in a.skill.values())
    return mass, sum(len(a.skill) for a in pop.agents)


def average_knowledge(pop: Population) -> float:
    """Mean skill over the topics agents actually hold."""
    if not pop.agents:
        raise StateError("average_knowledge of an empty population")
    mass, held = _skill_mass(pop)
    if held == 0:
        raise StateError("average_knowledge needs at least one held topic")
    return mass / held


def knowledge_diffusion(pop: Population, n_topics: int | None = None) -> float:
    """Mean skill over all N*T agent-topic slots; unheld topics count as zero."""
    n_topics = pop.params.n_topics if n_topics is None else n_topics
    if n_topics < 1:
        raise StateError("knowledge_diffusion needs n_topics >= 1")
    if not pop.agents:
        raise StateError("knowledge_diffusion of an empty population")
    mass, _ = _skill_mass(pop)
    return mass / (len(pop.agents) * n_topics)


def dynamic_average_degree(activity: Iterable[tuple[int, int, int]],
                           bucket: TimeBucket, n_agents: int) -> float:
    """2E/N with E the distinct undirected edges active inside ``bucket``.

    ``activity`` yields ``(tick, i, j)`` for every successful interaction.
    """
    edges = set()
    for k, i, j in activity:
        if bucket.start <= k < bucket.end:
            edges.add((i, j) if i < j else (j, i))
    return 2.0 * len(edges) / n_agents


def local_clustering(adj: Sequence[set[int]]) -> list[float]:
    out = []
    for nbrs in adj:
        d = len(nbrs)
        if d < 2:
            out.append(0.0)
            continue
        links = sum(len(adj[u] & nbrs) for u in nbrs) // 2
        out.append(2.0 * links / (d * (d - 1)))
    return out


def transitivity(adj: Sequence[set[int]]) -> float:
    """Global clustering: 3 * triangles / connected triples."""
    closed = 0
    triples = 0
    for nbrs in adj:
        d = len(nbrs)
        triples += d * (d - 1) // 2
        closed += sum(len(adj[u] & nbrs) for u in nbrs) // 2
    return closed / triples if triples else 0.0


def clustering_coefficient(pop_or_adj, variant: str = "average") -> float:
    """Average local clustering (default) or global transitivity."""
    adj = _adjacency(pop_or_adj)
    if variant == "global":
        return transitivity(adj)
    if variant != "average":
        raise ValueError(f"unknown clustering variant {variant!r}")
    if not adj:
        return 0.0
    return math.fsum(local_clustering(adj)) / len(adj)


def degree_assortativity(pop_or_adj) -> float | None:
    """Pearson correlation of endpoint degrees over both edge orientations.

    Returns None when undefined (no edges or zero degree variance).
    """
    adj = _adjacency(pop_or_adj)
    deg = [len(n) for n in adj]
    xs: list[int] = []
    ys: list[int] = []
    for u, nbrs in enumerate(adj):
        du = deg[u]
        for v in nbrs:
            xs.append(du)
            ys.append(deg[v])
    m = len(xs)
    if m == 0:
        return None
    # Both orientations are present, so the x and y marginals coincide.
    mean = math.fsum(xs) / m
    var = math.fsum((x - mean) ** 2 for x in xs)
    if var <= 1e-12 * max(1.0, mean * mean) * m:
        return None
    cov = math.fsum((x - mean) * (y - mean) for x, y in zip(xs, ys))
    return cov / var


def _adjacency(pop_or_adj) -> Sequence[set[int]]:
    if isinstance(pop_or_adj, Population):
        return pop_or_adj.undirected_adjacency()
    return pop_or_adj


def snapshot_metrics(pop: Population, activity: Iterable[tuple[int, int, int]],
                     bucket: TimeBucket, clustering_variant: str = "average") -> MetricsRecord:
    adj = pop.undirected_adjacency()
    return MetricsRecord(
        bucket=bucket,
        dyn_avg_degree=dynamic_average_degree(activity, bucket, len(pop.agents)),
        clustering=clustering_coefficient(adj, clustering_variant),
        assortativity=degree_assortativity(adj),
        ak=average_knowledge(pop),
        kd=knowledge_diffusion(pop),
    )
