"""Finitely presented schemas: objects, generating morphisms and path equations."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import NamedTuple, Optional, Union

DEFAULT_PATH_BOUND = 8


class SchemaError(ValueError):
    """Raised when a schema declaration is ill-formed."""


class NonSaturatingError(SchemaError):
    """Raised when a hom-set does not stabilise within the path-length bound."""


class Morphism(NamedTuple):
    name: str
    dom: str
    cod: str


@dataclass(frozen=True)
class Path:
    """A composable sequence of generators, read left to right (first step first).

    The empty sequence is the identity at ``source``.
    """

    source: str
    steps: tuple[str, ...]
    target: str

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def is_identity(self) -> bool:
        return not self.steps

    def __str__(self) -> str:
        if not self.steps:
            return f"id({self.source})"
        return ".".join(self.steps)


PathLike = Union[Path, Sequence[str]]


@dataclass(frozen=True)
class Schema:
    objects: tuple[str, ...]
    morphisms: tuple[Morphism, ...]
    equations: tuple[tuple[Path, Path], ...] = ()

    @cached_property
    def _by_name(self) -> dict[str, Morphism]:
        return {m.name: m for m in self.morphisms}

    @cached_property
    def _outgoing(self) -> dict[str, tuple[Morphism, ...]]:
        return {ob: tuple(m for m in self.morphisms if m.dom == ob) for ob in self.objects}

    @cached_property
    def _incoming(self) -> dict[str, tuple[Morphism, ...]]:
        return {ob: tuple(m for m in self.morphisms if m.cod == ob) for ob in self.objects}

    def has_object(self, ob: str) -> bool:
        return ob in self._outgoing

    def morphism(self, name: str) -> Morphism:
        try:
            return self._by_name[name]
        except KeyError:
            raise SchemaError(f"unknown morphism {name!r}") from None

    def outgoing(self, ob: str) -> tuple[Morphism, ...]:
        return self._outgoing[ob]

    def incoming(self, ob: str) -> tuple[Morphism, ...]:
        return self._incoming[ob]

    def path(self, source: str, steps: Iterable[str] = ()) -> Path:
        """Build a path from ``source``, checking composability."""
        if not self.has_object(source):
            raise SchemaError(f"unknown object {source!r}")
        steps = tuple(steps)
        current = source
        for i, name in enumerate(steps):
            m = self.morphism(name)
            if m.dom != current:
                raise SchemaError(
                    f"path {'.'.join(steps)!r} is not composable at step {i}: "
                    f"{name!r} starts at {m.dom!r}, not {current!r}"
                )
            current = m.cod
        return Path(source, steps, current)

    def as_path(self, p: PathLike, at: str | None = None) -> Path:
        if isinstance(p, Path):
            self.path(p.source, p.steps)
            return p
        steps = tuple(p)
        if not steps:
            if at is None:
                raise SchemaError("identity path needs an explicit object")
            return self.path(at)
        source = self.morphism(steps[0]).dom
        if at is not None and at != source:
            raise SchemaError(f"path {'.'.join(steps)!r} does not start at {at!r}")
        return self.path(source, steps)


def build_schema(
    objects: Iterable[str],
    morphisms: Iterable[tuple[str, str, str] | Morphism],
    equations: Iterable[tuple[PathLike, PathLike] | tuple[PathLike, PathLike, str]] = (),
) -> Schema:
    """Validate a presentation and return the schema.

    Equations are ``(lhs, rhs)`` or ``(lhs, rhs, at)``; each side is a
    :class:`Path` or a sequence of generator names. ``at`` names the source
    object and is required when both sides are identities.
    """
    objects = tuple(objects)
    seen: set[str] = set()
    for ob in objects:
        if not isinstance(ob, str) or not ob:
            raise SchemaError("object names must be nonempty strings")
        if ob in seen:
            raise SchemaError(f"duplicate name {ob!r}")
        seen.add(ob)

    gens: list[Morphism] = []
    for entry in morphisms:
        name, dom, cod = entry
        if not isinstance(name, str) or not name:
            raise SchemaError("morphism names must be nonempty strings")
        if name in seen:
            raise SchemaError(f"duplicate name {name!r}")
        seen.add(name)
        for end in (dom, cod):
            if end not in objects:
                raise SchemaError(f"morphism {name!r} refers to unknown object {end!r}")
        gens.append(Morphism(name, dom, cod))

    schema = Schema(objects, tuple(gens))
    eqs: list[tuple[Path, Path]] = []
    for eq in equations:
        lhs, rhs, *rest = eq
        at = rest[0] if rest else None
        if at is None:
            for side in (lhs, rhs):
                if isinstance(side, Path):
                    at = side.source
                    break
                if len(side):
                    at = schema.morphism(side[0]).dom
                    break
        p, q = schema.as_path(lhs, at), schema.as_path(rhs, at)
        if p.source != q.source or p.target != q.target:
            raise SchemaError(
                f"equation {p} = {q} is not parallel: "
                f"{p.source}->{p.target} vs {q.source}->{q.target}"
            )
        eqs.append((p, q))
    return Schema(schema.objects, schema.morphisms, tuple(eqs))


class _UnionFind:
    def __init__(self) -> None:
        self.parent: list[int] = []

    def add(self) -> int:
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, i: int) -> int:
        parent = self.parent
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(self, i: int, j: int) -> bool:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return False
        if rj < ri:
            ri, rj = rj, ri
        self.parent[rj] = ri
        return True


@dataclass(frozen=True)
class HomSet:
    """Equivalence classes of paths between two objects.

    Each class lists its member paths, shortest-then-lexicographic first, so
    ``classes[i][0]`` is the canonical representative.
    """

    source: str
    target: str
    classes: tuple[tuple[Path, ...], ...]
    saturated_at: int = field(compare=False)
    table: Optional[_PathTable] = field(default=None, compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.classes)

    def representatives(self) -> list[Path]:
        return [c[0] for c in self.classes]

    def index_of(self, steps: Sequence[str]) -> int:
        """Class of the path ``steps``; paths of any length are reduced a step at a time."""
        steps = tuple(steps)
        for i, cls in enumerate(self.classes):
            if any(p.steps == steps for p in cls):
                return i
        if self.table is None:
            raise KeyError(steps)
        ob, k = _reduce(self.table, self.source, steps)
        if ob != self.target:
            raise KeyError(steps)
        return k


@dataclass(frozen=True)
class _PathTable:
    saturated_at: int
    # target -> classes, ordered by representative
    classes: dict[str, tuple[tuple[Path, ...], ...]]
    # steps -> (target, class index); covers every path shorter than saturated_at
    lookup: dict[tuple[str, ...], tuple[str, int]]


def _path_key(p: Path) -> tuple[int, tuple[str, ...]]:
    return (len(p.steps), p.steps)


def _rewrites(schema: Schema, p: Path) -> Iterable[tuple[str, ...]]:
    """All paths reachable from ``p`` by one application of an equation."""
    objs = [p.source]
    for name in p.steps:
        objs.append(schema.morphism(name).cod)
    n = len(p.steps)
    for lhs, rhs in schema.equations:
        for u, v in ((lhs, rhs), (rhs, lhs)):
            k = len(u.steps)
            for i in range(n - k + 1):
                if objs[i] != u.source or p.steps[i : i + k] != u.steps:
                    continue
                yield p.steps[:i] + v.steps + p.steps[i + k :]


@lru_cache(maxsize=256)
def _path_table(schema: Schema, source: str, bound: int) -> _PathTable:
    if not schema.has_object(source):
        raise SchemaError(f"unknown object {source!r}")
    if bound < 0:
        raise ValueError("path length bound must be nonnegative")

    paths: list[Path] = [schema.path(source)]
    index: dict[tuple[str, ...], int] = {(): 0}
    uf = _UnionFind()
    uf.add()
    stratum = [0]
    saturated_at = None
    # One stratum past the bound is inspected to certify completeness.
    for length in range(1, bound + 2):
        fresh: list[int] = []
        for i in stratum:
            p = paths[i]
            for m in schema.outgoing(p.target):
                q = Path(source, p.steps + (m.name,), m.cod)
                index[q.steps] = len(paths)
                paths.append(q)
                uf.add()
                fresh.append(index[q.steps])
        for i in fresh:
            for steps in _rewrites(schema, paths[i]):
                j = index.get(steps)
                if j is not None:
                    uf.union(i, j)
        shortest: dict[int, int] = {}
        for i, p in enumerate(paths):
            r = uf.find(i)
            shortest[r] = min(shortest.get(r, len(p)), len(p))
        if all(shortest[uf.find(i)] < length for i in fresh):
            saturated_at = length
            break
        stratum = fresh
    if saturated_at is None:
        raise NonSaturatingError(
            f"paths out of {source!r} keep producing new classes up to length "
            f"{bound + 1}; the hom-sets may be infinite"
        )

    groups: dict[int, list[Path]] = {}
    for i, p in enumerate(paths):
        if len(p) < saturated_at or len(p) <= bound:
            groups.setdefault(uf.find(i), []).append(p)
    by_target: dict[str, list[tuple[int, tuple[Path, ...]]]] = {ob: [] for ob in schema.objects}
    for root, members in groups.items():
        members.sort(key=_path_key)
        by_target[members[0].target].append((root, tuple(members)))
    classes: dict[str, tuple[tuple[Path, ...], ...]] = {}
    root_class: dict[int, tuple[str, int]] = {}
    for ob, entries in by_target.items():
        entries.sort(key=lambda e: _path_key(e[1][0]))
        classes[ob] = tuple(members for _, members in entries)
        for k, (root, _) in enumerate(entries):
            root_class[root] = (ob, k)
    # Paths at the saturation stratum are not listed but still resolve to a class.
    lookup = {p.steps: root_class[uf.find(i)] for i, p in enumerate(paths)}
    return _PathTable(saturated_at, classes, lookup)


def hom_set(schema: Schema, a: str, b: str, path_length_bound: int = DEFAULT_PATH_BOUND) -> HomSet:
    """Enumerate the morphisms ``a -> b`` as classes of paths modulo the equations.

    Raises :class:`NonSaturatingError` if paths out of ``a`` still produce new
    classes one step past the bound.
    """
    if not schema.has_object(b):
        raise SchemaError(f"unknown object {b!r}")
    table = _path_table(schema, a, path_length_bound)
    return HomSet(a, b, table.classes[b], table.saturated_at, table)


def _reduce(table: _PathTable, source: str, steps: tuple[str, ...]) -> tuple[str, int]:
    if steps in table.lookup:
        return table.lookup[steps]
    ob, k = source, 0
    rep: tuple[str, ...] = ()
    for name in steps:
        try:
            ob, k = table.lookup[rep + (name,)]
        except KeyError:
            raise KeyError(steps) from None
        rep = table.classes[ob][k][0].steps
    return ob, k


def representable(schema: Schema, a: str, path_length_bound: int = DEFAULT_PATH_BOUND):
    """The C-set of all morphisms out of ``a``; generators act by post-composition.

    Element ``k`` of object ``X`` is the ``k``-th class of ``hom_set(a, X)``,
    so the generating element (the identity) is always element 1 of ``a``.
    """
    from .cset import CSet

    table = _path_table(schema, a, path_length_bound)
    x = CSet(schema)
    for ob in schema.objects:
        x.add_parts(ob, len(table.classes[ob]))
    for m in schema.morphisms:
        for k, members in enumerate(table.classes[m.dom], start=1):
            target_ob, j = table.lookup[members[0].steps + (m.name,)]
            x.set_subpart(m.name, k, j + 1)
    return x


def walk(schema: Schema, a: str, steps: Sequence[str], path_length_bound: int = DEFAULT_PATH_BOUND) -> tuple[str, int]:
    """Locate the element reached from the generator of ``representable(a)`` along ``steps``."""
    p = schema.path(a, steps)
    table = _path_table(schema, a, path_length_bound)
    ob, k = _reduce(table, a, p.steps)
    return ob, k + 1
