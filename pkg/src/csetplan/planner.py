"""Forward breadth-first planning over C-set states with rewrite rules as actions."""

from __future__ import annotations

import logging
from collections import deque
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Optional

from .cset import CSet, CSetMorphism, canonical_hash, isomorphic
from .hom import exists_mono, find_homomorphisms
from .rewrite import RewriteOutcome, Rule, apply_rule, check_gluing
from .schema import Schema

logger = logging.getLogger(__name__)


class PlanningError(ValueError):
    pass


class SearchBoundExceeded(PlanningError):
    """The state budget ran out before the depth-bounded space was exhausted."""

    def __init__(self, message: str, stats: SearchStatistics) -> None:
        super().__init__(message)
        self.stats = stats


@dataclass
class PlanningProblem:
    schema: Schema
    initial: CSet
    goal: CSet
    rules: dict[str, Rule]

    def __post_init__(self) -> None:
        for label, x in (("initial state", self.initial), ("goal", self.goal)):
            if x.schema != self.schema:
                raise PlanningError(f"{label} is over a different schema")
            if x.validate():
                raise PlanningError(f"{label} is not a valid instance")
        for name, rule in self.rules.items():
            if rule.pattern.schema != self.schema:
                raise PlanningError(f"rule {name!r} is over a different schema")


@dataclass
class Action:
    """A rule together with a concrete match into some state."""

    name: str
    rule: Rule
    match: CSetMorphism

    def describe(self) -> dict[str, dict[int, int]]:
        return {ob: pairs for ob, pairs in self.match.as_dict().items() if pairs}


@dataclass
class PlanStep:
    rule: str
    match: dict[str, dict[int, int]]

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "match": {ob: {str(k): v for k, v in pairs.items()} for ob, pairs in self.match.items()},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> PlanStep:
        return cls(
            data["rule"],
            {ob: {int(k): int(v) for k, v in pairs.items()} for ob, pairs in data["match"].items()},
        )


@dataclass
class Plan:
    steps: list[PlanStep] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    def to_json(self) -> list[dict]:
        return [s.to_json() for s in self.steps]

    @classmethod
    def from_json(cls, data: Sequence[Mapping]) -> Plan:
        return cls([PlanStep.from_json(s) for s in data])


@dataclass
class SearchStatistics:
    expansions: int = 0
    generated: int = 0
    duplicates: int = 0
    distinct_states: int = 0
    depth: int = 0

    def to_json(self) -> dict[str, int]:
        return dict(self.__dict__)


@dataclass
class PlanResult:
    plan: Optional[Plan]
    stats: SearchStatistics
    states: list[CSet] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.plan is not None

    @property
    def final_state(self) -> Optional[CSet]:
        return self.states[-1] if self.states else None


def applicable_actions(problem: PlanningProblem, state: CSet) -> list[Action]:
    """Every (rule, monic match) pair passing the gluing conditions, in rule then match order."""
    actions = []
    for name, rule in problem.rules.items():
        for m in find_homomorphisms(rule.pattern, state, monic=True):
            if check_gluing(rule.l, m).ok:
                actions.append(Action(name, rule, m))
    return actions


def transition(state: CSet, action: Action) -> CSet:
    """The next state, or :class:`PlanningError` if the action does not apply here."""
    m = action.match
    if m.cod != state:
        raise PlanningError(f"action {action.name!r} was matched against a different state")
    if not (m.is_natural() and m.is_injective()):
        raise PlanningError(f"action {action.name!r} has an invalid match")
    report = check_gluing(action.rule.l, m)
    if not report.ok:
        raise PlanningError(f"action {action.name!r} is not applicable: {report}")
    return apply_rule(action.rule, state, m).result


def goal_reached(state: CSet, goal: CSet) -> bool:
    return exists_mono(goal, state)


class _StateIndex:
    """States bucketed by canonical hash, confirmed by an isomorphism search."""

    def __init__(self) -> None:
        self.buckets: dict[str, list[CSet]] = {}
        self.count = 0

    def add(self, state: CSet) -> bool:
        bucket = self.buckets.setdefault(canonical_hash(state), [])
        for other in bucket:
            if isomorphic(state, other) is not None:
                return False
        bucket.append(state)
        self.count += 1
        return True


def plan_bfs(problem: PlanningProblem, max_depth: int = 10, max_states: int = 10_000) -> PlanResult:
    """Shortest plan by step count, deduplicating states up to isomorphism.

    Returns a result with ``plan=None`` when no plan exists within
    ``max_depth``; raises :class:`SearchBoundExceeded` when more than
    ``max_states`` distinct states would be needed.
    """
    stats = SearchStatistics()
    seen = _StateIndex()
    seen.add(problem.initial)
    stats.distinct_states = 1
    if goal_reached(problem.initial, problem.goal):
        return PlanResult(Plan(), stats, [problem.initial])

    # Each node is (state, parent index, step that produced it).
    nodes: list[tuple[CSet, int, Optional[PlanStep]]] = [(problem.initial, -1, None)]
    frontier = deque([(0, 0)])
    while frontier:
        index, depth = frontier.popleft()
        if depth >= max_depth:
            continue
        state = nodes[index][0]
        stats.expansions += 1
        for action in applicable_actions(problem, state):
            nxt = apply_rule(action.rule, state, action.match).result
            stats.generated += 1
            if not seen.add(nxt):
                stats.duplicates += 1
                continue
            stats.distinct_states = seen.count
            nodes.append((nxt, index, PlanStep(action.name, action.describe())))
            if goal_reached(nxt, problem.goal):
                stats.depth = depth + 1
                return _unwind(nodes, len(nodes) - 1, stats)
            if seen.count > max_states:
                raise SearchBoundExceeded(
                    f"explored {seen.count} distinct states without reaching the goal", stats
                )
            frontier.append((len(nodes) - 1, depth + 1))
        stats.depth = max(stats.depth, depth + 1)
    logger.debug("search space exhausted: %s", stats)
    return PlanResult(None, stats)


def _unwind(nodes, index: int, stats: SearchStatistics) -> PlanResult:
    steps = []
    states = []
    while index >= 0:
        state, parent, step = nodes[index]
        states.append(state)
        if step is not None:
            steps.append(step)
        index = parent
    steps.reverse()
    states.reverse()
    return PlanResult(Plan(steps), stats, states)


@dataclass
class PlanValidation:
    ok: bool
    final_state: CSet
    failed_step: Optional[int] = None
    reason: str = ""


def _match_from_step(rule: Rule, state: CSet, step: PlanStep) -> CSetMorphism:
    pattern = rule.pattern
    comps = {}
    for ob in pattern.schema.objects:
        pairs = step.match.get(ob, {})
        if set(pairs) != set(pattern.parts(ob)):
            raise PlanningError(f"match does not cover the {ob} parts of the pattern")
        comps[ob] = [pairs[i] for i in pattern.parts(ob)]
    return CSetMorphism(pattern, state, comps)


def validate_plan(problem: PlanningProblem, plan: Plan) -> PlanValidation:
    """Replay ``plan`` from the initial state and check that it ends at the goal."""
    state = problem.initial
    for i, step in enumerate(plan.steps):
        rule = problem.rules.get(step.rule)
        if rule is None:
            return PlanValidation(False, state, i, f"unknown rule {step.rule!r}")
        try:
            m = _match_from_step(rule, state, step)
            state = transition(state, Action(step.rule, rule, m))
        except (PlanningError, ValueError) as exc:
            return PlanValidation(False, state, i, str(exc))
    if not goal_reached(state, problem.goal):
        return PlanValidation(False, state, None, "final state does not contain the goal")
    return PlanValidation(True, state)


def replay(problem: PlanningProblem, plan: Plan) -> list[RewriteOutcome]:
    """Apply every step of ``plan`` and return the rewrite outcomes in order."""
    state = problem.initial
    outcomes = []
    for i, step in enumerate(plan.steps):
        rule = problem.rules.get(step.rule)
        if rule is None:
            raise PlanningError(f"step {i}: unknown rule {step.rule!r}")
        m = _match_from_step(rule, state, step)
        report = check_gluing(rule.l, m)
        if not report.ok:
            raise PlanningError(f"step {i}: {report}")
        outcome = apply_rule(rule, state, m)
        outcomes.append(outcome)
        state = outcome.result
    return outcomes
