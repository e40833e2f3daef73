"""Double-pushout rewriting of C-sets.

A rule is a span ``I <-l- K -r-> O`` with ``l`` monic. Applying it at a
monic match ``m: I -> X`` deletes ``m(I \\ l(K))`` (the pushout complement
``Z``), then glues ``O`` onto ``Z`` along ``K`` (the completion pushout ``Y``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .colimit import PushoutResult, is_pushout_square, pushout
from .cset import CSet, CSetError, CSetMorphism, check_same_schema, induced_subset
from .hom import find_homomorphisms


class RewriteError(ValueError):
    pass


class GluingError(RewriteError):
    def __init__(self, report: GluingReport) -> None:
        super().__init__(str(report))
        self.report = report


class Dangling(NamedTuple):
    """``morphism`` sends the surviving ``element`` to the deleted ``target``."""

    morphism: str
    element: tuple[str, int]
    target: tuple[str, int]

    def __str__(self) -> str:
        (eo, ei), (to, ti) = self.element, self.target
        return f"dangling: {self.morphism}({eo}#{ei}) = {to}#{ti} would be deleted"


class Identification(NamedTuple):
    """Two pattern elements sent to the same state element, at least one of them deleted."""

    object: str
    pattern_elements: tuple[int, int]
    element: int

    def __str__(self) -> str:
        a, b = self.pattern_elements
        return (
            f"identification: {self.object}#{a} and {self.object}#{b} both match "
            f"{self.object}#{self.element} but the rule does not preserve both"
        )


@dataclass
class GluingReport:
    dangling: list[Dangling] = field(default_factory=list)
    identification: list[Identification] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.dangling and not self.identification

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "gluing conditions hold"
        return "; ".join(str(v) for v in [*self.identification, *self.dangling])


class Rule:
    """A rewrite rule ``I <-l- K -r-> O``."""

    def __init__(self, l: CSetMorphism, r: CSetMorphism, name: str = "") -> None:
        if l.dom != r.dom:
            raise RewriteError("rule legs must share their domain K")
        check_same_schema(l.cod, r.cod)
        for side, label in ((l.dom, "K"), (l.cod, "I"), (r.cod, "O")):
            if side.validate():
                raise RewriteError(f"rule {name!r}: {label} is not a valid instance")
        l.check_natural()
        r.check_natural()
        if not l.is_injective():
            raise RewriteError(f"rule {name!r}: the left leg must be monic")
        self.l = l
        self.r = r
        self.name = name

    @property
    def pattern(self) -> CSet:
        return self.l.cod

    @property
    def glue(self) -> CSet:
        return self.l.dom

    @property
    def effect(self) -> CSet:
        return self.r.cod

    @classmethod
    def identity(cls, x: CSet, name: str = "id") -> Rule:
        i = CSetMorphism.identity(x)
        return cls(i, i, name)

    def __repr__(self) -> str:
        return f"Rule({self.name!r}, I={self.pattern!r}, K={self.glue!r}, O={self.effect!r})"


def _deleted(l: CSetMorphism, m: CSetMorphism) -> dict[str, set[int]]:
    return {
        ob: {m(ob, i) for i in l.cod.parts(ob)} - {m(ob, l(ob, k)) for k in l.dom.parts(ob)}
        for ob in l.cod.schema.objects
    }


def check_gluing(l: CSetMorphism, m: CSetMorphism) -> GluingReport:
    """Check the identification and dangling conditions for deleting along ``m``."""
    if not l.is_injective():
        raise RewriteError("the left leg must be monic")
    if m.dom != l.cod:
        raise RewriteError("the match must start at the rule's pattern")
    report = GluingReport()
    schema = l.cod.schema
    for ob in schema.objects:
        preserved = {l(ob, k) for k in l.dom.parts(ob)}
        seen: dict[int, int] = {}
        for i in l.cod.parts(ob):
            y = m(ob, i)
            if y in seen:
                j = seen[y]
                if not (i in preserved and j in preserved):
                    report.identification.append(Identification(ob, (j, i), y))
            else:
                seen[y] = i
    x = m.cod
    deleted = _deleted(l, m)
    for gen in schema.morphisms:
        doomed = deleted[gen.cod]
        if not doomed:
            continue
        for e in x.parts(gen.dom):
            if e in deleted[gen.dom]:
                continue
            t = x.subpart(gen.name, e)
            if t in doomed:
                report.dangling.append(Dangling(gen.name, (gen.dom, e), (gen.cod, t)))
    return report


def pushout_complement(l: CSetMorphism, m: CSetMorphism) -> tuple[CSetMorphism, CSetMorphism]:
    """Return ``(f: K -> Z, g: Z -> X)`` where ``Z`` is ``X`` minus the deleted elements.

    Surviving elements keep their relative order; ``g`` is the inclusion.
    """
    report = check_gluing(l, m)
    if not report.ok:
        raise GluingError(report)
    x = m.cod
    deleted = _deleted(l, m)
    keep = {ob: [i for i in x.parts(ob) if i not in deleted[ob]] for ob in x.schema.objects}
    z, g = induced_subset(x, keep)
    position = {ob: {old: new for new, old in enumerate(keep[ob], start=1)} for ob in keep}
    k = l.dom
    f = CSetMorphism(
        k, z, {ob: tuple(position[ob][m(ob, l(ob, i))] for i in k.parts(ob)) for ob in k.schema.objects}
    )
    return f, g


@dataclass
class RewriteOutcome:
    """Everything built while applying a rule at one match."""

    match: CSetMorphism
    complement: CSet
    f: CSetMorphism  # K -> Z
    g: CSetMorphism  # Z -> X
    to_result: CSetMorphism  # Z -> Y
    from_effect: CSetMorphism  # O -> Y
    result: CSet

    def verify(self, rule: Rule) -> bool:
        """Both squares commute and are pushouts."""
        left = is_pushout_square(rule.l, self.f, self.match, self.g)
        right = is_pushout_square(self.f, rule.r, self.to_result, self.from_effect)
        return left and right


def apply_rule(rule: Rule, x: CSet, m: CSetMorphism, *, verify: bool = False) -> RewriteOutcome:
    """Rewrite ``x`` at the match ``m``.

    Raises :class:`RewriteError` for a non-monic or non-natural match and
    :class:`GluingError` when the match violates the gluing conditions.
    """
    if m.dom != rule.pattern or m.cod != x:
        raise RewriteError("match does not go from the rule pattern to the state")
    if not m.is_natural():
        raise RewriteError("match is not a natural transformation")
    if not m.is_injective():
        raise RewriteError("match must be monic")
    f, g = pushout_complement(rule.l, m)
    po: PushoutResult = pushout(f, rule.r)
    outcome = RewriteOutcome(m, f.cod, f, g, po.left, po.right, po.apex)
    if po.apex.validate():
        raise CSetError("rewrite produced an instance violating the schema equations")
    if verify and not outcome.verify(rule):
        raise RewriteError("constructed squares are not pushouts")
    return outcome


@dataclass
class RewriteAll:
    outcomes: list[tuple[CSetMorphism, RewriteOutcome]]
    rejected: list[tuple[CSetMorphism, GluingReport]]


def rewrite_all(rule: Rule, x: CSet, *, limit: Optional[int] = None) -> RewriteAll:
    """Apply ``rule`` at every monic match; gluing failures are reported, not raised."""
    outcomes = []
    rejected = []
    for m in find_homomorphisms(rule.pattern, x, monic=True, limit=limit):
        report = check_gluing(rule.l, m)
        if report.ok:
            outcomes.append((m, apply_rule(rule, x, m)))
        else:
            rejected.append((m, report))
    return RewriteAll(outcomes, rejected)
