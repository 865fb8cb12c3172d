import random
import statistics
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from kdcontrol import control as ctl
from kdcontrol.dynamics import tick
from kdcontrol.metrics import average_knowledge, knowledge_diffusion
from kdcontrol.model import ConfigError, SimParams, setup

from conftest import make_pop


def grown(n=60, ticks=3000, seed=0, **kw):
    rng = random.Random(seed)
    pop = setup(SimParams(n_agents=n, max_ticks=ticks, **kw), rng)
    for _ in range(ticks):
        tick(pop, rng)
    return pop, rng


def test_degree_examples():
    pop = make_pop({i: {1: (100, 1)} for i in range(4)})
    assert all(ctl.degree(a, pop) == 0 for a in pop.agents)
    # 0 asked 1 twice, 2 asked 0 once
    pop.record_interaction(0, 1)
    pop.record_interaction(0, 1)
    pop.record_interaction(2, 0)
    assert ctl.degree(0, pop) == 2
    full = make_pop({i: {1: (100, 1)} for i in range(4)},
                    friends={i: {j: 1 for j in range(4) if j != i} for i in range(4)})
    assert [ctl.degree(i, full) for i in range(4)] == [3, 3, 3, 3]


@pytest.mark.parametrize("fraction, n, expected", [
    (0.01, 100, 1), (0.10, 500, 50), (0.50, 200, 100), (0.70, 1000, 700),
    (0.01, 10, 1), (0.25, 2, 1), (0.5, 5, 3),
])
def test_driver_count(fraction, n, expected):
    assert ctl.driver_count(fraction, n) == expected


def test_high_selects_the_hub(rng):
    # star: agent 0 is the hub
    pop = make_pop({i: {1: (100, 1)} for i in range(100)},
                   friends={i: {0: 1} for i in range(1, 100)})
    assert ctl.select_drivers(pop, ctl.ControlPolicy(ctl.HIGH, 0.01), rng) == [0]
    low = ctl.select_drivers(pop, ctl.ControlPolicy(ctl.LOW, 0.5), rng)
    assert len(low) == 50 and 0 not in low


def test_low_fraction_count(rng):
    pop, rng = grown(n=200, ticks=2000)
    drivers = ctl.select_drivers(pop, ctl.ControlPolicy(ctl.LOW, 0.50), rng)
    assert len(drivers) == 100 == len(set(drivers))


def test_ranking_respects_degree_order():
    pop, rng = grown(n=80)
    deg = [ctl.degree(i, pop) for i in range(80)]
    hi = ctl.select_drivers(pop, ctl.ControlPolicy(ctl.HIGH, 0.1), rng)
    lo = ctl.select_drivers(pop, ctl.ControlPolicy(ctl.LOW, 0.1), rng)
    assert min(deg[i] for i in hi) >= max(deg[i] for i in range(80) if i not in hi)
    assert max(deg[i] for i in lo) <= min(deg[i] for i in range(80) if i not in lo)
    assert not set(hi) & set(lo) or len(set(deg)) == 1


def test_full_tie_block_is_uniform():
    pop = make_pop({i: {1: (100, 1)} for i in range(10)})
    rng = random.Random(1)
    pol = ctl.ControlPolicy(ctl.HIGH, 0.3)
    c = Counter(i for _ in range(20_000) for i in ctl.select_drivers(pop, pol, rng))
    freqs = [c[i] / 20_000 for i in range(10)]
    assert all(f == pytest.approx(0.3, abs=0.02) for f in freqs)


def test_select_drivers_requires_active_policy(rng):
    pop = make_pop({0: {1: (100, 1)}})
    with pytest.raises(ConfigError):
        ctl.select_drivers(pop, ctl.ControlPolicy(), rng)


@pytest.mark.parametrize("kw", [
    dict(selection="mid", driver_fraction=0.1),
    dict(selection="high", driver_fraction=0.0),
    dict(selection="high", driver_fraction=1.5),
    dict(selection="low", driver_fraction=0.5, topic_rate=0.0),
    dict(selection="low", driver_fraction=0.5, interval=0),
    dict(selection="low", driver_fraction=0.5, injected_skill=-1.0),
])
def test_policy_validation(kw):
    with pytest.raises(ConfigError):
        ctl.ControlPolicy(**kw).validate()


def ten_topic_agent(n_topics=100):
    return make_pop({0: {t: (10, 30 + t) for t in range(10)}, 1: {50: (100, 1)}},
                    n_topics=n_topics)


def test_inject_integral_rate(rng):
    pop = ten_topic_agent()
    before = dict(pop.agents[0].skill)
    new = ctl.inject_random_topics(pop, 0, ctl.ControlPolicy(ctl.HIGH, 0.1, topic_rate=0.3), rng)
    a = pop.agents[0]
    assert len(new) == 3 and len(set(new)) == 3
    assert not set(new) & set(before)
    assert all(a.skill[t] == 0.0 for t in new)
    assert all(a.skill[t] == s for t, s in before.items())
    # new entries enter at the mean interest (10), then everything is rescaled
    assert all(a.interest[t] == pytest.approx(100 / 13) for t in a.interest)
    assert sum(a.interest.values()) == pytest.approx(100.0, abs=1e-9)
    assert all(0 in pop.holders[t] for t in new)


def test_inject_when_all_topics_held(rng):
    pop = make_pop({0: {t: (25, 10) for t in range(4)}}, n_topics=4)
    assert ctl.inject_random_topics(pop, 0, ctl.ControlPolicy(ctl.LOW, 1.0), rng) == []


def test_inject_capped_by_unheld_topics(rng):
    pop = make_pop({0: {t: (10, 10) for t in range(10)}}, n_topics=12)
    new = ctl.inject_random_topics(pop, 0, ctl.ControlPolicy(ctl.LOW, 1.0, topic_rate=0.5), rng)
    assert sorted(new) == [10, 11]


def test_inject_stochastic_rounding_mean():
    rng = random.Random(5)
    pol = ctl.ControlPolicy(ctl.HIGH, 0.1, topic_rate=0.01)
    counts = []
    for _ in range(100_000):
        pop = ten_topic_agent()
        counts.append(len(ctl.inject_random_topics(pop, 0, pol, rng)))
    assert set(counts) == {0, 1}
    assert statistics.fmean(counts) == pytest.approx(0.1, abs=0.01)


@given(x=st.floats(0, 50), seed=st.integers(0, 1000))
def test_stochastic_round_brackets(x, seed):
    r = ctl.stochastic_round(x, random.Random(seed))
    assert r in (int(x), int(x) + 1) or (abs(x - round(x)) < 1e-9 and r == round(x))


def test_control_step_report_and_invariants():
    pop, rng = grown(n=100, ticks=3000, seed=3)
    pol = ctl.ControlPolicy(ctl.LOW, 0.5)
    skills = {a.id: dict(a.skill) for a in pop.agents}
    ak, kd = average_knowledge(pop), knowledge_diffusion(pop)
    rep = ctl.control_step(pop, pol, rng)
    assert rep.tick == pop.tick and len(rep.drivers) == 50
    assert set(rep.counts) == set(rep.drivers)
    assert rep.total == sum(len(v) for v in rep.topics.values()) > 0
    for a in pop.agents:
        for t, s in skills[a.id].items():
            assert a.skill[t] == s
        assert abs(sum(a.interest.values()) - 100.0) <= 1e-9
        assert len(a.skill) == len(skills[a.id]) + rep.counts.get(a.id, 0)
    assert knowledge_diffusion(pop) == kd
    assert average_knowledge(pop) <= ak


def test_frozen_driver_set_is_reused():
    pop, rng = grown(n=50, ticks=1000)
    rep = ctl.control_step(pop, ctl.ControlPolicy(ctl.HIGH, 0.1), rng, drivers=[3, 7])
    assert rep.drivers == [3, 7]


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(4, 60), fh=st.floats(0.01, 0.5),
       fl=st.floats(0.01, 0.5))
def test_high_and_low_disjoint_without_straddling_ties(seed, n, fh, fl):
    pop, rng = grown(n=n, ticks=800, seed=seed)
    kh, kl = ctl.driver_count(fh, n), ctl.driver_count(fl, n)
    if kh + kl > n:
        return
    deg = sorted((ctl.degree(i, pop) for i in range(n)), reverse=True)
    cut_high, cut_low = deg[kh - 1], deg[n - kl]
    if cut_high == cut_low:  # one tie block spans both cuts
        return
    hi = ctl.select_drivers(pop, ctl.ControlPolicy(ctl.HIGH, fh), rng)
    lo = ctl.select_drivers(pop, ctl.ControlPolicy(ctl.LOW, fl), rng)
    assert not set(hi) & set(lo)
