"""Agents, population container and deterministic setup.

An agent's *personal state* is a pair of dicts keyed by topic id (interest and
skill); its *friend state* maps peer id to the number of successful
question-answer interactions it initiated with that peer. The union of friend
states is the directed, weighted adjacency of the network.

The population also keeps derived indexes that the dynamics rely on for
speed: ``in_peers[j]`` (agents that have asked ``j``), ``holders[t]`` (agents
holding topic ``t``) and ``ranked[t]`` (the same holders as ``(skill, id)``
pairs in ascending order). Every mutation goes through the methods below so
the indexes never drift from the primary state; call ``reindex`` after
editing agents by hand.
"""

from __future__ import annotations

import random
from bisect import bisect_left, insort
from dataclasses import asdict, dataclass, field


class ConfigError(ValueError):
    """Invalid model or scenario parameters."""


class StateError(ValueError):
    """Out-of-range agent ids or other violations of the population contract."""


@dataclass(frozen=True)
class SimParams:
    n_agents: int = 100
    n_topics: int = 100
    max_setup_topics: int = 10
    max_ticks: int = 100_000
    gamma: float = 2.0
    rho: float = 1.0
    theta: float = 5.0
    alpha: float = 2.0
    beta: float = 10.0
    interest_budget: float = 100.0
    skill_max: float = 100.0

    def validate(self) -> "SimParams":
        checks = [
            (self.n_agents >= 1, "n_agents >= 1"),
            (self.n_topics >= 1, "n_topics >= 1"),
            (1 <= self.max_setup_topics <= self.n_topics,
             "1 <= max_setup_topics <= n_topics"),
            (self.max_ticks >= 0, "max_ticks >= 0"),
            (self.gamma >= 1, "gamma >= 1"),
            (self.rho >= 0, "rho >= 0"),
            (self.theta > 0, "theta > 0"),
            (self.alpha > 0, "alpha > 0"),
            (self.beta > 0, "beta > 0"),
            (self.interest_budget > 0, "interest_budget > 0"),
            (self.skill_max > 0, "skill_max > 0"),
        ]
        for ok, rule in checks:
            if not ok:
                raise ConfigError(f"invalid parameters: violates {rule}")
        return self

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(slots=True)
class Agent:
    id: int
    interest: dict[int, float] = field(default_factory=dict)
    skill: dict[int, float] = field(default_factory=dict)
    friends: dict[int, int] = field(default_factory=dict)

    @property
    def topics(self) -> list[int]:
        return list(self.skill)

    def entries(self) -> list[tuple[int, float, float]]:
        """(topic, interest, skill) triples sorted by topic."""
        return [(t, self.interest[t], self.skill[t]) for t in sorted(self.skill)]


class Population:
    """All agents plus the current tick and the derived lookup indexes."""

    def __init__(self, params: SimParams, agents: list[Agent]):
        self.params = params
        self.agents = agents
        self.tick = 0
        self.reindex()

    def reindex(self) -> None:
        self.in_peers: list[set[int]] = [set() for _ in self.agents]
        self.holders: list[set[int]] = [set() for _ in range(self.params.n_topics)]
        self.ranked: list[list[tuple[float, int]]] = [[] for _ in range(self.params.n_topics)]
        for a in self.agents:
            for t, s in a.skill.items():
                self.holders[t].add(a.id)
                self.ranked[t].append((s, a.id))
            for j in a.friends:
                self.in_peers[j].add(a.id)
        for r in self.ranked:
            r.sort()

    def __len__(self) -> int:
        return len(self.agents)

    def _check(self, i: int) -> None:
        if not 0 <= i < len(self.agents):
            raise StateError(f"agent id {i} out of range [0, {len(self.agents)})")

    def record_interaction(self, i: int, j: int) -> bool:
        """Increment x_ij on the requester's friend state; True if the edge is new."""
        if i == j:
            raise StateError("self-interaction is not allowed")
        friends = self.agents[i].friends
        x = friends.get(j)
        if x is None:
            friends[j] = 1
            self.in_peers[j].add(i)
            return True
        friends[j] = x + 1
        return False

    def add_topic(self, i: int, topic: int, interest: float, skill: float) -> None:
        a = self.agents[i]
        if topic in a.skill:
            raise StateError(f"agent {i} already holds topic {topic}")
        a.interest[topic] = interest
        a.skill[topic] = skill
        self.holders[topic].add(i)
        insort(self.ranked[topic], (skill, i))

    def set_skill(self, i: int, topic: int, value: float) -> None:
        skill = self.agents[i].skill
        ranked = self.ranked[topic]
        del ranked[bisect_left(ranked, (skill[topic], i))]
        insort(ranked, (value, i))
        skill[topic] = value

    def neighbors(self, i: int) -> set[int]:
        """Neighbours in the undirected projection of the friend graph."""
        return self.in_peers[i].union(self.agents[i].friends)

    def undirected_adjacency(self) -> list[set[int]]:
        return [self.neighbors(i) for i in range(len(self.agents))]


def setup(params: SimParams, seed: int | random.Random) -> Population:
    """Build the initial population.

    Each agent draws ``n ~ U{1..max_setup_topics}`` distinct topics, a uniform
    skill in ``[0, skill_max]`` per topic and an equal share ``B / n`` of the
    interest budget. Friend states start empty.
    """
    params.validate()
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    agents = []
    for i in range(params.n_agents):
        n = rng.randint(1, params.max_setup_topics)
        topics = rng.sample(range(params.n_topics), n)
        share = params.interest_budget / n
        a = Agent(i)
        for t in topics:
            a.interest[t] = share
            a.skill[t] = rng.uniform(0.0, params.skill_max)
        agents.append(a)
    return Population(params, agents)


def adjacency_weight(pop: Population, i: int, j: int) -> int:
    """a_ij: successful interactions initiated by ``i`` towards ``j``."""
    pop._check(i)
    pop._check(j)
    return pop.agents[i].friends.get(j, 0)


def interest_total(agent: Agent) -> float:
    return sum(agent.interest.values())
