"""Backtracking search for C-set homomorphisms and monomorphisms."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from typing import Optional

from .cset import CSet, CSetMorphism, check_same_schema


@dataclass
class SearchStats:
    """Counters for one search; ``nodes`` counts candidate images tried at branch points."""

    nodes: int = 0
    found: int = 0


def _search_order(pattern: CSet) -> list[tuple[str, int]]:
    schema = pattern.schema
    position = {ob: i for i, ob in enumerate(schema.objects)}
    obs = sorted(schema.objects, key=lambda ob: (-len(schema.outgoing(ob)), position[ob]))
    return [(ob, x) for ob in obs for x in pattern.parts(ob)]


def find_homomorphisms(
    pattern: CSet,
    target: CSet,
    *,
    monic: bool = False,
    limit: Optional[int] = None,
    initial: Optional[Mapping[str, Mapping[int, int]]] = None,
    stats: Optional[SearchStats] = None,
) -> list[CSetMorphism]:
    """All natural maps ``pattern -> target``, optionally injective.

    Assigning an element immediately forces the images of everything reachable
    from it through subparts, so conflicts are detected before branching.
    ``initial`` fixes some images in advance. Results come in lexicographic
    order of the assignment sequence, which is deterministic for fixed
    numbering; no assignment is visited twice, so the list has no duplicates.
    """
    check_same_schema(pattern, target)
    if stats is None:
        stats = SearchStats()
    schema = pattern.schema
    if limit is not None and limit <= 0:
        return []
    for ob in schema.objects:
        if pattern.nparts(ob) and not target.nparts(ob):
            return []
        if monic and pattern.nparts(ob) > target.nparts(ob):
            return []

    images: dict[str, list[int]] = {ob: [0] * pattern.nparts(ob) for ob in schema.objects}
    used: dict[str, set[int]] = {ob: set() for ob in schema.objects}
    trail: list[tuple[str, int]] = []
    outgoing = {ob: [(m.name, m.cod) for m in schema.outgoing(ob)] for ob in schema.objects}

    def assign(ob: str, x: int, y: int) -> bool:
        # Forward checking along subparts; records every new binding on the trail.
        stack = [(ob, x, y)]
        while stack:
            ob, x, y = stack.pop()
            current = images[ob][x - 1]
            if current:
                if current != y:
                    return False
                continue
            if monic and y in used[ob]:
                return False
            images[ob][x - 1] = y
            used[ob].add(y)
            trail.append((ob, x))
            for name, cod in outgoing[ob]:
                stack.append((cod, pattern.subpart(name, x), target.subpart(name, y)))
        return True

    def undo(mark: int) -> None:
        while len(trail) > mark:
            ob, x = trail.pop()
            used[ob].discard(images[ob][x - 1])
            images[ob][x - 1] = 0

    if initial:
        for ob, pairs in initial.items():
            for x, y in pairs.items():
                if not assign(ob, x, y):
                    return []

    order = _search_order(pattern)
    results: list[CSetMorphism] = []

    def search(pos: int) -> bool:
        while pos < len(order) and images[order[pos][0]][order[pos][1] - 1]:
            pos += 1
        if pos == len(order):
            comps = {ob: tuple(v) for ob, v in images.items()}
            results.append(CSetMorphism(pattern, target, comps, check=False))
            stats.found += 1
            return limit is not None and len(results) >= limit
        ob, x = order[pos]
        for y in target.parts(ob):
            if monic and y in used[ob]:
                continue
            stats.nodes += 1
            mark = len(trail)
            if assign(ob, x, y):
                if search(pos + 1):
                    return True
            undo(mark)
        return False

    search(0)
    return results


def exists_mono(pattern: CSet, target: CSet) -> bool:
    """Whether ``pattern`` embeds in ``target``; this is the applicability test."""
    return bool(find_homomorphisms(pattern, target, monic=True, limit=1))


def count_homomorphisms(pattern: CSet, target: CSet, *, monic: bool = False) -> int:
    return len(find_homomorphisms(pattern, target, monic=monic))
