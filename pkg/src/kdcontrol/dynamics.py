"""One simulation tick: topic choice, peer choice, communication and learning.

RNG consumption order within a tick is fixed: requester, topic, peer
tie-break (only when several candidates share the top skill), fallback draw
(only when the peer path did not succeed).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .model import Agent, Population, SimParams, StateError

PEER = "peer"
RANDOM = "random"
FAILURE = "failure"


@dataclass(slots=True)
class TickOutcome:
    tick: int
    requester: int
    topic: int
    result: str
    responder: int | None = None
    delta_skill: float = 0.0
    new_edge: bool = False

    @property
    def success(self) -> bool:
        return self.result != FAILURE

    @property
    def edge_activity(self) -> tuple[int, int, bool] | None:
        if self.responder is None:
            return None
        return (self.requester, self.responder, self.new_edge)


def select_topic(agent: Agent, rng: random.Random) -> int:
    """Interest-weighted topic choice; uniform if every interest is zero."""
    topics = list(agent.interest)
    if not topics:
        raise StateError(f"agent {agent.id} has an empty personal state")
    if len(topics) == 1:
        return topics[0]
    weights = list(agent.interest.values())
    if sum(weights) <= 0.0:
        return rng.choice(topics)
    return rng.choices(topics, weights)[0]


def reachable(pop: Population, i: int) -> set[int]:
    """Friends and friends-of-friends of ``i`` along outgoing edges, ``i`` excluded."""
    agents = pop.agents
    out = agents[i].friends
    reach = set(out)
    for f in out:
        reach.update(agents[f].friends)
    reach.discard(i)
    return reach


def peer_candidates(pop: Population, i: int, topic: int) -> set[int]:
    """Agents within two outgoing hops of ``i`` that hold ``topic``."""
    if not pop.agents[i].friends:
        return set()
    cands = reachable(pop, i)
    cands.intersection_update(pop.holders[topic])
    return cands


def _best_by_enumeration(pop: Population, i: int, topic: int) -> list[int]:
    agents = pop.agents
    best = -1.0
    tied: list[int] = []
    for j in peer_candidates(pop, i, topic):
        s = agents[j].skill[topic]
        if s > best:
            best = s
            tied = [j]
        elif s == best:
            tied.append(j)
    return tied


def _best_by_ranking(pop: Population, i: int, topic: int) -> list[int]:
    # Walk holders from the most skilled down; stop after the first reachable
    # skill level. Reachability: direct friend, or a friend of ours asked j.
    out = pop.agents[i].friends
    if not out:
        return []
    out_keys = out.keys()
    in_peers = pop.in_peers
    tied: list[int] = []
    level = None
    for s, j in reversed(pop.ranked[topic]):
        if level is not None and s != level:
            break
        if j != i and (j in out or not out_keys.isdisjoint(in_peers[j])):
            level = s
            tied.append(j)
    return tied


def select_peer(requester: Agent, topic: int, pop: Population, rng: random.Random,
                route: str = "ranking") -> int | None:
    """Most skilled friend or friend-of-friend holding ``topic``.

    Ties are broken uniformly at random. ``route="enumerate"`` builds the full
    two-hop neighbourhood instead of scanning the skill ranking; both give the
    same answer and consume the RNG identically.
    """
    if route == "ranking":
        tied = _best_by_ranking(pop, requester.id, topic)
    elif route == "enumerate":
        tied = _best_by_enumeration(pop, requester.id, topic)
    else:
        raise ValueError(f"unknown route {route!r}")
    if not tied:
        return None
    if len(tied) == 1:
        return tied[0]
    tied.sort()
    return tied[rng.randrange(len(tied))]


def attempt_communication(requester: Agent, responder: Agent, topic: int) -> bool:
    try:
        s_resp = responder.skill[topic]
    except KeyError:
        raise StateError(f"responder {responder.id} does not hold topic {topic}") from None
    return s_resp > requester.skill[topic]


def random_fallback(requester: Agent, topic: int, pop: Population,
                    rng: random.Random) -> int | None:
    """One uniform draw among the other agents; returned only if it qualifies."""
    n = len(pop.agents)
    if n < 2:
        return None
    j = rng.randrange(n - 1)
    if j >= requester.id:
        j += 1
    s = pop.agents[j].skill.get(topic)
    if s is not None and s > requester.skill[topic]:
        return j
    return None


def skill_gain(s_req: float, s_resp: float, nu: int, params: SimParams) -> float:
    """Skill chunk learned from a more skilled peer, discounted by low trust."""
    if not s_resp > s_req:
        raise ValueError("skill_gain requires s_resp > s_req")
    if nu < 0:
        raise ValueError("interaction count must be >= 0")
    return (s_resp - s_req) / (params.gamma + params.rho * math.exp(-nu / params.theta))


def interest_gain(delta_skill: float, params: SimParams) -> float:
    if delta_skill < 0:
        raise ValueError("interest_gain requires a nonnegative skill gain")
    return params.alpha * -math.expm1(-delta_skill / params.beta)


def apply_update(pop: Population, requester: Agent, responder: int, topic: int,
                 delta_skill: float, delta_interest: float) -> bool:
    """Apply learning to the requester and record the interaction.

    The interest gain on ``topic`` is paid for by an even cut on every other
    topic; cuts that would go below zero are clamped and the shortfall is
    taken back from the gain, so the interest total is unchanged. Returns
    True when the interaction created a new edge.
    """
    old = requester.skill[topic]
    new = old + delta_skill
    if new == old:
        # increment below float resolution; still move one ulp towards the responder
        new = math.nextafter(old, math.inf)
    pop.set_skill(requester.id, topic, min(new, pop.params.skill_max))

    interest = requester.interest
    m = len(interest)
    if m > 1 and delta_interest > 0.0:
        cut = delta_interest / (m - 1)
        absorbed = 0.0
        for t, v in interest.items():
            if t == topic:
                continue
            if v >= cut:
                interest[t] = v - cut
                absorbed += cut
            else:
                interest[t] = 0.0
                absorbed += v
        interest[topic] += absorbed
    return pop.record_interaction(requester.id, responder)


def tick(pop: Population, rng: random.Random) -> TickOutcome:
    """Advance the population by one communication attempt."""
    params = pop.params
    if pop.tick >= params.max_ticks:
        raise StateError(f"tick {pop.tick} is past max_ticks={params.max_ticks}")
    agents = pop.agents
    k = pop.tick
    req = agents[rng.randrange(len(agents))]
    topic = select_topic(req, rng)

    result = FAILURE
    responder = select_peer(req, topic, pop, rng)
    if responder is not None and attempt_communication(req, agents[responder], topic):
        result = PEER
    else:
        responder = random_fallback(req, topic, pop, rng)
        if responder is not None:
            result = RANDOM

    pop.tick = k + 1
    if responder is None:
        return TickOutcome(k, req.id, topic, FAILURE)

    nu = req.friends.get(responder, 0)
    ds = skill_gain(req.skill[topic], agents[responder].skill[topic], nu, params)
    dl = interest_gain(ds, params)
    new = apply_update(pop, req, responder, topic, ds, dl)
    return TickOutcome(k, req.id, topic, result, responder, ds, new)
