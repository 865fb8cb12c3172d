import random

import pytest

from kdcontrol.model import Agent, Population, SimParams


def make_pop(spec, n_topics=10, friends=None, **params):
    """Population from ``{agent_id: {topic: (interest, skill)}}``.

    ``friends`` maps requester -> {peer: count}.
    """
    n = max(spec) + 1
    agents = []
    for i in range(n):
        a = Agent(i)
        for t, (l, s) in spec.get(i, {}).items():
            a.interest[t] = float(l)
            a.skill[t] = float(s)
        a.friends.update((friends or {}).get(i, {}))
        agents.append(a)
    p = SimParams(n_agents=n, n_topics=n_topics, max_setup_topics=1, **params)
    return Population(p, agents)


@pytest.fixture
def rng():
    return random.Random(12345)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report():
    def report(criterion: str, passed: bool, detail: str) -> bool:
        line = f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
