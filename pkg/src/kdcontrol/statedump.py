"""Canonical line-oriented state dump.

    # kdcontrol-state n_agents=3 n_topics=100 skill_max=100 tick=0
    agent 0 | topics: (4,50.000000000,12.500000000);(9,50.000000000,80.000000000) | friends: (2,3)

Reals use fixed 9-decimal formatting, records are sorted by id and entries by
topic / peer id. The header line is a comment carrying the sizes the oracle
needs; parsing rejects anything else that is malformed, reporting the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .model import Agent, Population

HEADER = "# kdcontrol-state"


class DumpParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def format_agent(a: Agent) -> str:
    topics = ";".join(f"({t},{a.interest[t]:.9f},{a.skill[t]:.9f})" for t in sorted(a.skill))
    friends = ";".join(f"({j},{x})" for j, x in sorted(a.friends.items()))
    return f"agent {a.id} | topics: {topics} | friends: {friends}"


def dumps(pop: Population) -> str:
    p = pop.params
    lines = [f"{HEADER} n_agents={p.n_agents} n_topics={p.n_topics} "
             f"skill_max={p.skill_max:g} tick={pop.tick}"]
    lines.extend(format_agent(a) for a in sorted(pop.agents, key=lambda a: a.id))
    return "\n".join(lines) + "\n"


def write_dump(pop: Population, path: str | Path) -> None:
    Path(path).write_text(dumps(pop))


@dataclass
class StateDump:
    n_agents: int
    n_topics: int
    skill_max: float
    tick: int
    # per agent: list of (topic, interest, skill) and dict peer -> x
    topics: list[list[tuple[int, float, float]]]
    friends: list[dict[int, int]]


_RECORD = re.compile(r"^agent (\d+) \| topics: (.*) \| friends: (.*)$")
_TOPIC = re.compile(r"^\((\d+),(-?\d+\.\d{9}),(-?\d+\.\d{9})\)$")
_FRIEND = re.compile(r"^\((\d+),(\d+)\)$")
_HEADER = re.compile(
    r"^# kdcontrol-state n_agents=(\d+) n_topics=(\d+) skill_max=(\S+) tick=(\d+)$")


def parse_dump(text: str) -> StateDump:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    else:
        raise DumpParseError(len(lines), "missing trailing newline (truncated dump?)")
    if not lines:
        raise DumpParseError(1, "empty dump")
    m = _HEADER.match(lines[0])
    if not m:
        raise DumpParseError(1, "missing or malformed header")
    n, n_topics, skill_max, tick = int(m[1]), int(m[2]), float(m[3]), int(m[4])
    topics: list[list[tuple[int, float, float]]] = []
    friends: list[dict[int, int]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        m = _RECORD.match(line)
        if not m:
            raise DumpParseError(lineno, "malformed agent record")
        if int(m[1]) != len(topics):
            raise DumpParseError(lineno, f"expected agent {len(topics)}, got {m[1]}")
        entries = []
        for item in filter(None, m[2].split(";")):
            tm = _TOPIC.match(item)
            if not tm or int(tm[1]) >= n_topics:
                raise DumpParseError(lineno, f"bad topic entry {item!r}")
            entries.append((int(tm[1]), float(tm[2]), float(tm[3])))
        peers = {}
        for item in filter(None, m[3].split(";")):
            fm = _FRIEND.match(item)
            if not fm or int(fm[1]) >= n or int(fm[2]) < 1:
                raise DumpParseError(lineno, f"bad friend entry {item!r}")
            peers[int(fm[1])] = int(fm[2])
        if not entries:
            raise DumpParseError(lineno, "agent without topics")
        topics.append(entries)
        friends.append(peers)
    if len(topics) != n:
        raise DumpParseError(len(lines) + 1, f"expected {n} agents, found {len(topics)}")
    return StateDump(n, n_topics, skill_max, tick, topics, friends)


def read_dump(path: str | Path) -> StateDump:
    return parse_dump(Path(path).read_text())
