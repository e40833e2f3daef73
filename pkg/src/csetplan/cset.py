"""C-set instances, natural transformations between them, and triple export.

Elements of each object are numbered densely from 1. A subpart that has not
been set yet is ``None``; such an instance is incomplete and fails
:meth:`CSet.validate`.
"""

from __future__ import annotations

import hashlib
from collections.abc import Iterable, Iterator, Mapping, Sequence
from typing import NamedTuple, Optional

from .schema import Schema, SchemaError


class CSetError(ValueError):
    """Raised on ill-typed edits or invalid instances."""


class NotNaturalError(CSetError):
    """Raised when a family of component maps fails naturality."""


class Violation(NamedTuple):
    """One failure reported by :meth:`CSet.validate`.

    ``kind`` is ``"undefined"`` (a subpart is unset) or ``"equation"``;
    ``where`` names the morphism or the equation.
    """

    kind: str
    where: str
    object: str
    element: int

    def __str__(self) -> str:
        if self.kind == "undefined":
            return f"{self.where}({self.object}#{self.element}) is undefined"
        return f"equation {self.where} fails at {self.object}#{self.element}"


class Triple(NamedTuple):
    subject: tuple[str, int]
    predicate: str
    object: tuple[str, int]

    def __str__(self) -> str:
        (so, si), (oo, oi) = self.subject, self.object
        return f"{so}#{si} {self.predicate} {oo}#{oi}"


class CSet:
    """A finite instance of a schema: a set of parts per object and a map per generator."""

    def __init__(self, schema: Schema) -> None:
        self.schema = schema
        self._parts: dict[str, int] = {ob: 0 for ob in schema.objects}
        self._subparts: dict[str, list[Optional[int]]] = {m.name: [] for m in schema.morphisms}

    # -- construction ---------------------------------------------------

    def add_part(self, ob: str) -> int:
        return self.add_parts(ob, 1).start

    def add_parts(self, ob: str, n: int) -> range:
        if ob not in self._parts:
            raise CSetError(f"unknown object {ob!r}")
        start = self._parts[ob] + 1
        self._parts[ob] += n
        for m in self.schema.outgoing(ob):
            self._subparts[m.name].extend([None] * n)
        return range(start, start + n)

    def set_subpart(self, morphism: str, x: int, y: int) -> CSet:
        try:
            m = self.schema.morphism(morphism)
        except SchemaError as exc:
            raise CSetError(str(exc)) from None
        if not 1 <= x <= self._parts[m.dom]:
            raise CSetError(f"{m.dom}#{x} does not exist")
        if not 1 <= y <= self._parts[m.cod]:
            raise CSetError(f"{morphism} target {m.cod}#{y} does not exist")
        self._subparts[morphism][x - 1] = y
        return self

    def copy(self) -> CSet:
        other = CSet(self.schema)
        other._parts = dict(self._parts)
        other._subparts = {k: list(v) for k, v in self._subparts.items()}
        return other

    @classmethod
    def from_data(
        cls,
        schema: Schema,
        parts: Mapping[str, int],
        subparts: Mapping[str, Sequence[int]] | None = None,
    ) -> CSet:
        x = cls(schema)
        for ob, n in parts.items():
            x.add_parts(ob, n)
        for name, values in (subparts or {}).items():
            m = schema.morphism(name)
            if len(values) != x.nparts(m.dom):
                raise CSetError(
                    f"subpart {name!r} has {len(values)} values for {x.nparts(m.dom)} {m.dom} parts"
                )
            for i, v in enumerate(values, start=1):
                x.set_subpart(name, i, v)
        return x

    # -- access ---------------------------------------------------------

    def nparts(self, ob: str) -> int:
        try:
            return self._parts[ob]
        except KeyError:
            raise CSetError(f"unknown object {ob!r}") from None

    def parts(self, ob: str) -> range:
        return range(1, self.nparts(ob) + 1)

    def subpart(self, morphism: str, x: int) -> int:
        y = self._subparts[morphism][x - 1]
        if y is None:
            raise CSetError(f"{morphism}({x}) is undefined")
        return y

    def subpart_values(self, morphism: str) -> list[Optional[int]]:
        return list(self._subparts[morphism])

    def walk(self, x: int, steps: Iterable[str]) -> int:
        for name in steps:
            x = self.subpart(name, x)
        return x

    def incident(self, morphism: str, y: int) -> list[int]:
        """Elements whose ``morphism`` value is ``y``."""
        return [i for i, v in enumerate(self._subparts[morphism], start=1) if v == y]

    def size(self) -> int:
        return sum(self._parts.values())

    def counts(self) -> dict[str, int]:
        return dict(self._parts)

    def is_empty(self) -> bool:
        return self.size() == 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CSet):
            return NotImplemented
        return (
            self.schema == other.schema
            and self._parts == other._parts
            and self._subparts == other._subparts
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        counts = ", ".join(f"{ob}={n}" for ob, n in self._parts.items())
        return f"CSet({counts})"

    # -- checks ---------------------------------------------------------

    def validate(self) -> list[Violation]:
        """Report unset subparts and equation failures; an empty list means valid."""
        report: list[Violation] = []
        for m in self.schema.morphisms:
            for i, v in enumerate(self._subparts[m.name], start=1):
                if v is None:
                    report.append(Violation("undefined", m.name, m.dom, i))
        if report:
            return report
        for lhs, rhs in self.schema.equations:
            label = f"{lhs} = {rhs}"
            for x in self.parts(lhs.source):
                if self.walk(x, lhs.steps) != self.walk(x, rhs.steps):
                    report.append(Violation("equation", label, lhs.source, x))
        return report

    def is_valid(self) -> bool:
        return not self.validate()

    def check(self) -> CSet:
        report = self.validate()
        if report:
            raise CSetError("invalid instance: " + "; ".join(map(str, report)))
        return self


def check_same_schema(x: CSet, y: CSet) -> None:
    if x.schema is not y.schema and x.schema != y.schema:
        raise SchemaError("instances are over different schemas")


class CSetMorphism:
    """A natural transformation between two C-sets.

    ``components`` maps each object to a tuple whose ``i - 1`` entry is the
    image of element ``i``.
    """

    def __init__(
        self,
        dom: CSet,
        cod: CSet,
        components: Mapping[str, Sequence[int]],
        *,
        check: bool = True,
    ) -> None:
        check_same_schema(dom, cod)
        self.dom = dom
        self.cod = cod
        comps: dict[str, tuple[int, ...]] = {}
        for ob in dom.schema.objects:
            values = tuple(components.get(ob, ()))
            if len(values) != dom.nparts(ob):
                raise CSetError(
                    f"component at {ob} has {len(values)} entries for {dom.nparts(ob)} parts"
                )
            n = cod.nparts(ob)
            for v in values:
                if not 1 <= v <= n:
                    raise CSetError(f"component at {ob} sends an element to missing {ob}#{v}")
            comps[ob] = values
        self.components = comps
        if check:
            self.check_natural()

    @classmethod
    def identity(cls, x: CSet) -> CSetMorphism:
        return cls(x, x, {ob: tuple(x.parts(ob)) for ob in x.schema.objects}, check=False)

    def __call__(self, ob: str, x: int) -> int:
        return self.components[ob][x - 1]

    def naturality_failures(self) -> list[tuple[str, int]]:
        failures = []
        for m in self.dom.schema.morphisms:
            src, tgt = self.components[m.dom], self.components[m.cod]
            for x in self.dom.parts(m.dom):
                if tgt[self.dom.subpart(m.name, x) - 1] != self.cod.subpart(m.name, src[x - 1]):
                    failures.append((m.name, x))
        return failures

    def is_natural(self) -> bool:
        return not self.naturality_failures()

    def check_natural(self) -> CSetMorphism:
        failures = self.naturality_failures()
        if failures:
            detail = ", ".join(f"{m} at #{x}" for m, x in failures[:5])
            raise NotNaturalError(f"component maps are not natural ({detail})")
        return self

    def compose(self, other: CSetMorphism) -> CSetMorphism:
        """``other`` after ``self`` (diagrammatic order)."""
        comps = {
            ob: tuple(other.components[ob][v - 1] for v in vals)
            for ob, vals in self.components.items()
        }
        return CSetMorphism(self.dom, other.cod, comps, check=False)

    def is_injective(self) -> bool:
        return all(len(set(v)) == len(v) for v in self.components.values())

    def is_surjective(self) -> bool:
        return all(
            len(set(v)) == self.cod.nparts(ob) for ob, v in self.components.items()
        )

    def as_dict(self) -> dict[str, dict[int, int]]:
        return {ob: {i: v for i, v in enumerate(vals, start=1)} for ob, vals in self.components.items()}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CSetMorphism):
            return NotImplemented
        return self.dom == other.dom and self.cod == other.cod and self.components == other.components

    __hash__ = None  # type: ignore[assignment]

    def key(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self.components[ob] for ob in self.dom.schema.objects)

    def __repr__(self) -> str:
        return f"CSetMorphism({self.components})"


def is_mono(f: CSetMorphism) -> bool:
    """True iff every component is injective. Raises on non-natural input."""
    f.check_natural()
    return f.is_injective()


def category_of_elements(x: CSet) -> list[Triple]:
    """One triple per (generator, element of its domain), sorted by object, element, generator."""
    x.check()
    triples = []
    for ob in sorted(x.schema.objects):
        gens = sorted(x.schema.outgoing(ob), key=lambda m: m.name)
        for i in x.parts(ob):
            for m in gens:
                triples.append(Triple((ob, i), m.name, (m.cod, x.subpart(m.name, i))))
    return triples


def format_triples(triples: Iterable[Triple]) -> str:
    return "".join(f"{t}\n" for t in triples)


def from_elements(schema: Schema, counts: Mapping[str, int], triples: Iterable[Triple]) -> CSet:
    """Rebuild an instance from its part counts and triples."""
    x = CSet(schema)
    for ob in schema.objects:
        x.add_parts(ob, counts.get(ob, 0))
    for t in triples:
        m = schema.morphism(t.predicate)
        if (t.subject[0], t.object[0]) != (m.dom, m.cod):
            raise CSetError(f"triple {t} does not match the type of {m.name}")
        x.set_subpart(t.predicate, t.subject[1], t.object[1])
    return x


def _digest(data: object) -> str:
    return hashlib.blake2b(repr(data).encode(), digest_size=16).hexdigest()


def canonical_hash(x: CSet, rounds: int | None = None) -> str:
    """An isomorphism-invariant fingerprint by iterated neighbourhood refinement.

    Equal fingerprints do not imply isomorphism; unequal ones rule it out.
    """
    schema = x.schema
    colors = {ob: [ob] * x.nparts(ob) for ob in schema.objects}
    if rounds is None:
        rounds = x.size() + 1
    distinct = -1
    for _ in range(rounds):
        new: dict[str, list[str]] = {}
        for ob in schema.objects:
            out_gens = schema.outgoing(ob)
            in_gens = schema.incoming(ob)
            row = []
            for i in x.parts(ob):
                out_sig = tuple(
                    (m.name, colors[m.cod][x.subpart(m.name, i) - 1]) for m in out_gens
                )
                in_sig = tuple(
                    (m.name, tuple(sorted(colors[m.dom][j - 1] for j in x.incident(m.name, i))))
                    for m in in_gens
                )
                row.append(_digest((colors[ob][i - 1], out_sig, in_sig)))
            new[ob] = row
        colors = new
        count = len({c for row in colors.values() for c in row})
        if count == distinct:
            break
        distinct = count
    summary = tuple((ob, x.nparts(ob), tuple(sorted(colors[ob]))) for ob in schema.objects)
    return _digest(summary)


def isomorphic(x: CSet, y: CSet) -> Optional[CSetMorphism]:
    """Return an isomorphism ``x -> y`` if one exists, else ``None``."""
    from .hom import find_homomorphisms

    check_same_schema(x, y)
    if x.counts() != y.counts():
        return None
    if canonical_hash(x) != canonical_hash(y):
        return None
    # A monic map between instances of equal finite size is bijective, and the
    # inverse of a natural bijection is natural.
    found = find_homomorphisms(x, y, monic=True, limit=1)
    return found[0] if found else None


def induced_subset(x: CSet, keep: Mapping[str, Iterable[int]]) -> tuple[CSet, CSetMorphism]:
    """Restrict ``x`` to the kept elements, renumbered in order, with its inclusion map.

    The kept family must be closed under every subpart.
    """
    kept = {ob: sorted(set(keep.get(ob, ()))) for ob in x.schema.objects}
    renumber = {ob: {old: new for new, old in enumerate(kept[ob], start=1)} for ob in kept}
    z = CSet(x.schema)
    for ob in x.schema.objects:
        z.add_parts(ob, len(kept[ob]))
    for m in x.schema.morphisms:
        for old in kept[m.dom]:
            target = x.subpart(m.name, old)
            if target not in renumber[m.cod]:
                raise CSetError(f"{m.name}({m.dom}#{old}) leaves the kept elements")
            z.set_subpart(m.name, renumber[m.dom][old], renumber[m.cod][target])
    inclusion = CSetMorphism(z, x, {ob: tuple(kept[ob]) for ob in kept}, check=False)
    return z, inclusion


def elements(x: CSet) -> Iterator[tuple[str, int]]:
    for ob in x.schema.objects:
        for i in x.parts(ob):
            yield ob, i
