"""Driver selection by degree rank and random-topic injection."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .model import Agent, ConfigError, Population

NONE = "none"
HIGH = "high"
LOW = "low"


@dataclass(frozen=True)
class ControlPolicy:
    selection: str = NONE
    driver_fraction: float = 0.0
    topic_rate: float = 0.30
    interval: int = 1000
    injected_skill: float = 0.0
    # Recompute the degree ranking at every event; False freezes the first set.
    reselect: bool = True

    def validate(self) -> "ControlPolicy":
        if self.selection not in (NONE, HIGH, LOW):
            raise ConfigError(f"selection must be none|high|low, got {self.selection!r}")
        if self.selection != NONE:
            if not 0.0 < self.driver_fraction <= 1.0:
                raise ConfigError("driver_fraction must be in (0, 1]")
            if not 0.0 < self.topic_rate <= 1.0:
                raise ConfigError("topic_rate must be in (0, 1]")
            if self.interval < 1:
                raise ConfigError("injection_interval must be >= 1")
            if self.injected_skill < 0:
                raise ConfigError("injected_skill must be >= 0")
        return self

    @property
    def active(self) -> bool:
        return self.selection != NONE


@dataclass
class InjectionReport:
    tick: int
    drivers: list[int]
    counts: dict[int, int] = field(default_factory=dict)
    topics: dict[int, list[int]] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def degree(agent: Agent | int, pop: Population) -> int:
    i = agent if isinstance(agent, int) else agent.id
    return len(pop.neighbors(i))


def driver_count(fraction: float, n: int) -> int:
    # half-up rounding, never fewer than one driver
    return max(1, min(n, math.floor(fraction * n + 0.5)))


def select_drivers(pop: Population, policy: ControlPolicy, rng: random.Random) -> list[int]:
    """Top (HIGH) or bottom (LOW) of the degree ranking.

    Agents are shuffled before a stable sort on degree, so ties inside the
    block straddling the cut are broken uniformly at random.
    """
    if not policy.active:
        raise ConfigError("select_drivers needs a HIGH or LOW policy")
    n = len(pop.agents)
    ids = list(range(n))
    rng.shuffle(ids)
    deg = [len(pop.neighbors(i)) for i in range(n)]
    ids.sort(key=deg.__getitem__, reverse=policy.selection == HIGH)
    return ids[:driver_count(policy.driver_fraction, n)]


def stochastic_round(x: float, rng: random.Random) -> int:
    """floor(x) plus a Bernoulli draw on the fractional part (unbiased)."""
    x = round(x, 9)
    base = math.floor(x)
    frac = x - base
    if frac > 0.0 and rng.random() < frac:
        base += 1
    return base


def inject_random_topics(pop: Population, i: int, policy: ControlPolicy,
                         rng: random.Random) -> list[int]:
    """Give agent ``i`` new random topics; returns the injected topic ids.

    New entries get the agent's mean pre-injection interest and
    ``policy.injected_skill``; all interests are then rescaled so the total
    is back at the budget.
    """
    agent = pop.agents[i]
    n_topics = pop.params.n_topics
    m = len(agent.interest)
    if m >= n_topics:
        return []
    count = stochastic_round(policy.topic_rate * m, rng)
    if count <= 0:
        return []
    unheld = [t for t in range(n_topics) if t not in agent.interest]
    count = min(count, len(unheld))
    new = rng.sample(unheld, count)

    mean_interest = sum(agent.interest.values()) / m
    for t in new:
        pop.add_topic(i, t, mean_interest, policy.injected_skill)
    total = sum(agent.interest.values())
    if total > 0.0:
        scale = pop.params.interest_budget / total
        interest = agent.interest
        for t in interest:
            interest[t] *= scale
    return new


def control_step(pop: Population, policy: ControlPolicy, rng: random.Random,
                 drivers: list[int] | None = None) -> InjectionReport:
    """One injection event. ``drivers`` overrides selection (frozen mode)."""
    if drivers is None:
        drivers = select_drivers(pop, policy, rng)
    report = InjectionReport(pop.tick, list(drivers))
    for i in drivers:
        new = inject_random_topics(pop, i, policy, rng)
        report.counts[i] = len(new)
        report.topics[i] = new
    return report
