import random
import statistics

import pytest
from hypothesis import given, settings, strategies as st

from kdcontrol.metrics import average_knowledge
from kdcontrol.model import ConfigError, SimParams, StateError, adjacency_weight, setup
from kdcontrol.statedump import dumps

from conftest import make_pop


def test_setup_topic_counts_and_interest_split():
    p = SimParams(n_agents=100, n_topics=100, max_setup_topics=10)
    pop = setup(p, 7)
    assert pop.tick == 0
    for a in pop.agents:
        assert 1 <= len(a.skill) <= 10
        assert set(a.skill) == set(a.interest)
        assert all(0 <= t < 100 for t in a.skill)
        share = 100.0 / len(a.skill)
        assert all(v == share for v in a.interest.values())
        assert all(0.0 <= s <= 100.0 for s in a.skill.values())
        assert a.friends == {}


def test_setup_mean_topic_count_is_about_five_percent_of_topics():
    # U{1..10} has mean 5.5, i.e. ~5% of T=100 topics
    p = SimParams(n_agents=1000, n_topics=100, max_setup_topics=10)
    counts = [len(a.skill) for s in range(20) for a in setup(p, s).agents]
    assert statistics.fmean(counts) == pytest.approx(5.5, abs=0.05)


def test_single_setup_topic_gets_whole_budget():
    pop = setup(SimParams(n_agents=50, max_setup_topics=1, interest_budget=100.0), 1)
    for a in pop.agents:
        assert len(a.skill) == 1
        assert list(a.interest.values()) == [100.0]


def test_initial_ak_near_middle_of_scale():
    p = SimParams(n_agents=100, skill_max=100.0)
    aks = [average_knowledge(setup(p, s)) for s in range(1000)]
    assert statistics.fmean(aks) == pytest.approx(50.0, abs=2.0)


def test_setup_is_deterministic():
    p = SimParams(n_agents=200)
    assert dumps(setup(p, 99)) == dumps(setup(p, 99))
    assert dumps(setup(p, 99)) != dumps(setup(p, 100))


@pytest.mark.parametrize("kw, rule", [
    (dict(n_agents=0), "n_agents"),
    (dict(max_setup_topics=0), "max_setup_topics"),
    (dict(n_topics=5, max_setup_topics=6), "max_setup_topics"),
    (dict(gamma=0.5), "gamma >= 1"),
    (dict(rho=-1), "rho"),
    (dict(theta=0), "theta"),
    (dict(alpha=0), "alpha"),
    (dict(beta=-2), "beta"),
    (dict(interest_budget=0), "interest_budget"),
    (dict(skill_max=0), "skill_max"),
])
def test_invalid_params_name_the_constraint(kw, rule):
    with pytest.raises(ConfigError, match=rule):
        setup(SimParams(**kw), 0)


def test_adjacency_weight_fresh_and_after_interactions():
    pop = setup(SimParams(n_agents=5), 0)
    assert all(adjacency_weight(pop, i, j) == 0 for i in range(5) for j in range(5))
    assert pop.record_interaction(0, 1) is True
    assert adjacency_weight(pop, 0, 1) == 1


def test_adjacency_weight_replays_interaction_log():
    pop = setup(SimParams(n_agents=4), 0)
    log = [(0, 2), (1, 3), (0, 2), (0, 2), (3, 1)]
    for i, j in log:
        pop.record_interaction(i, j)
    # independent count straight from the log
    for i in range(4):
        for j in range(4):
            assert adjacency_weight(pop, i, j) == sum(1 for e in log if e == (i, j))
    assert adjacency_weight(pop, 0, 2) == 3
    assert adjacency_weight(pop, 2, 0) == 0


def test_adjacency_weight_rejects_out_of_range():
    pop = setup(SimParams(n_agents=3), 0)
    with pytest.raises(StateError):
        adjacency_weight(pop, 0, 3)
    with pytest.raises(StateError):
        adjacency_weight(pop, -1, 0)


def test_indexes_follow_mutations():
    pop = make_pop({0: {1: (50, 10)}, 1: {1: (50, 30)}, 2: {2: (100, 5)}})
    pop.record_interaction(0, 1)
    pop.add_topic(2, 1, 10.0, 0.0)
    pop.set_skill(0, 1, 20.0)
    assert pop.in_peers[1] == {0}
    assert pop.holders[1] == {0, 1, 2}
    assert pop.ranked[1] == [(0.0, 2), (20.0, 0), (30.0, 1)]
    with pytest.raises(StateError):
        pop.add_topic(2, 1, 1.0, 1.0)
    with pytest.raises(StateError):
        pop.record_interaction(1, 1)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 40), t=st.integers(1, 30), lam=st.integers(1, 30), seed=st.integers(0, 2**32))
def test_setup_invariants_property(n, t, lam, seed):
    lam = min(lam, t)
    pop = setup(SimParams(n_agents=n, n_topics=t, max_setup_topics=lam), seed)
    for a in pop.agents:
        assert 1 <= len(a.skill) <= lam
        assert abs(sum(a.interest.values()) - 100.0) <= 1e-9
    assert sum(len(h) for h in pop.holders) == sum(len(a.skill) for a in pop.agents)
