"""STRIPS-style baseline: literal-set states, subset applicability, add/delete effects.

Terms beginning with ``?`` are variables; everything else is a constant.
"""

from __future__ import annotations

import itertools
from collections import deque
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Optional

from .planner import SearchBoundExceeded, SearchStatistics


class ClassicalError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Literal:
    predicate: str
    args: tuple[str, ...] = ()

    @classmethod
    def of(cls, predicate: str, *args: str) -> Literal:
        return cls(predicate, tuple(args))

    @property
    def is_ground(self) -> bool:
        return not any(is_variable(a) for a in self.args)

    def substitute(self, binding: Mapping[str, str]) -> Literal:
        return Literal(self.predicate, tuple(binding.get(a, a) for a in self.args))

    def __str__(self) -> str:
        return f"{self.predicate}({', '.join(self.args)})"


def is_variable(term: str) -> bool:
    return term.startswith("?")


State = frozenset  # of ground Literal


@dataclass(frozen=True)
class ActionSchema:
    name: str
    parameters: tuple[str, ...]
    precondition: frozenset[Literal]
    add: frozenset[Literal] = frozenset()
    delete: frozenset[Literal] = frozenset()

    def __post_init__(self) -> None:
        params = set(self.parameters)
        if len(params) != len(self.parameters):
            raise ClassicalError(f"{self.name}: repeated parameter")
        for p in self.parameters:
            if not is_variable(p):
                raise ClassicalError(f"{self.name}: parameter {p!r} must start with '?'")
        for lit in itertools.chain(self.precondition, self.add, self.delete):
            for a in lit.args:
                if is_variable(a) and a not in params:
                    raise ClassicalError(f"{self.name}: unbound variable {a} in {lit}")


@dataclass(frozen=True)
class GroundAction:
    name: str
    arguments: tuple[str, ...]
    precondition: frozenset[Literal]
    add: frozenset[Literal]
    delete: frozenset[Literal]

    @property
    def is_ground(self) -> bool:
        return all(l.is_ground for l in itertools.chain(self.precondition, self.add, self.delete))

    def __str__(self) -> str:
        return f"{self.name}({', '.join(self.arguments)})"


def ground(action: ActionSchema, constants: Sequence[str]) -> GroundAction:
    if len(constants) != len(action.parameters):
        raise ClassicalError(
            f"{action.name} takes {len(action.parameters)} arguments, got {len(constants)}"
        )
    for c in constants:
        if is_variable(c):
            raise ClassicalError(f"cannot ground {action.name} with variable {c}")
    binding = dict(zip(action.parameters, constants))

    def sub(lits: Iterable[Literal]) -> frozenset[Literal]:
        return frozenset(l.substitute(binding) for l in lits)

    return GroundAction(
        action.name, tuple(constants), sub(action.precondition), sub(action.add), sub(action.delete)
    )


def applicable(action: GroundAction, state: State) -> bool:
    if not action.is_ground:
        raise ClassicalError(f"{action} is not ground")
    return action.precondition <= state


def transition(action: GroundAction, state: State) -> State:
    """Delete the negative effects, then add the positive ones."""
    if not applicable(action, state):
        missing = ", ".join(sorted(map(str, action.precondition - state)))
        raise ClassicalError(f"{action} is not applicable: missing {missing}")
    return (state - action.delete) | action.add


@dataclass
class ClassicalDomain:
    predicates: dict[str, int]
    actions: list[ActionSchema]

    def __post_init__(self) -> None:
        for a in self.actions:
            for lit in itertools.chain(a.precondition, a.add, a.delete):
                self.check_literal(lit)

    def check_literal(self, lit: Literal) -> None:
        arity = self.predicates.get(lit.predicate)
        if arity is None:
            raise ClassicalError(f"unknown predicate {lit.predicate!r}")
        if arity != len(lit.args):
            raise ClassicalError(f"{lit} does not match arity {arity} of {lit.predicate}")


@dataclass
class ClassicalProblem:
    domain: ClassicalDomain
    objects: tuple[str, ...]
    initial: State
    goal: frozenset[Literal]

    def __post_init__(self) -> None:
        for lit in itertools.chain(self.initial, self.goal):
            self.domain.check_literal(lit)
            if not lit.is_ground:
                raise ClassicalError(f"{lit} is not ground")


def ground_all(problem: ClassicalProblem) -> list[GroundAction]:
    """Every grounding of every action over the problem objects, in declaration order."""
    result = []
    for a in problem.domain.actions:
        for args in itertools.product(problem.objects, repeat=len(a.parameters)):
            result.append(ground(a, args))
    return result


@dataclass
class ClassicalResult:
    plan: Optional[list[GroundAction]]
    expansions: int = 0
    states: list[State] = field(default_factory=list)

    @property
    def final_state(self) -> Optional[State]:
        return self.states[-1] if self.states else None


def plan_bfs_classical(
    problem: ClassicalProblem, max_depth: int = 10, max_states: int = 100_000
) -> ClassicalResult:
    """Breadth-first search over literal sets; shortest plan or ``plan=None``."""
    actions = ground_all(problem)
    start = frozenset(problem.initial)
    if problem.goal <= start:
        return ClassicalResult([], 0, [start])
    parent: dict[State, tuple[Optional[State], Optional[GroundAction]]] = {start: (None, None)}
    frontier = deque([(start, 0)])
    expansions = 0
    while frontier:
        state, depth = frontier.popleft()
        if depth >= max_depth:
            continue
        expansions += 1
        for a in actions:
            if not a.precondition <= state:
                continue
            nxt = transition(a, state)
            if nxt in parent:
                continue
            parent[nxt] = (state, a)
            if problem.goal <= nxt:
                return _unwind(parent, nxt, expansions)
            if len(parent) > max_states:
                raise SearchBoundExceeded(
                    f"explored {len(parent)} states without reaching the goal",
                    SearchStatistics(expansions=expansions, distinct_states=len(parent)),
                )
            frontier.append((nxt, depth + 1))
    return ClassicalResult(None, expansions)


def _unwind(parent, state: State, expansions: int) -> ClassicalResult:
    plan = []
    states = []
    current: Optional[State] = state
    while current is not None:
        states.append(current)
        prev, action = parent[current]
        if action is not None:
            plan.append(action)
        current = prev
    plan.reverse()
    states.reverse()
    return ClassicalResult(plan, expansions, states)


def format_state(state: Iterable[Literal]) -> list[str]:
    return [str(l) for l in sorted(state)]
