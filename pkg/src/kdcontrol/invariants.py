"""Runtime invariant checks usable as a ``run_scenario`` observer."""

from __future__ import annotations

from .metrics import MetricsRecord
from .model import Population

BUDGET_TOL = 1e-9


class InvariantViolation(AssertionError):
    pass


def check_population(pop: Population) -> None:
    p = pop.params
    for a in pop.agents:
        if not a.skill:
            raise InvariantViolation(f"agent {a.id} has no topics")
        total = sum(a.interest.values())
        if abs(total - p.interest_budget) > BUDGET_TOL:
            raise InvariantViolation(
                f"tick {pop.tick}: agent {a.id} interest total {total!r} != {p.interest_budget}")
        for t, s in a.skill.items():
            if not 0.0 <= s <= p.skill_max:
                raise InvariantViolation(f"tick {pop.tick}: agent {a.id} skill {s} on {t}")
            if a.interest[t] < 0.0:
                raise InvariantViolation(f"tick {pop.tick}: negative interest on {t}")
        if a.id in a.friends or any(x < 1 for x in a.friends.values()):
            raise InvariantViolation(f"agent {a.id} has a bad friend state")


def check_bucket(pop: Population, records: list[MetricsRecord]) -> None:
    """Observer for bucket boundaries: state invariants, AK >= KD, KD nondecreasing."""
    check_population(pop)
    last = records[-1]
    if last.ak < last.kd:
        raise InvariantViolation(f"AK {last.ak} < KD {last.kd} at {last.bucket}")
    if len(records) > 1 and last.kd < records[-2].kd:
        raise InvariantViolation(f"KD decreased at {last.bucket}")
